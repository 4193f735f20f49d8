//! Basic Harish-Chandra series for Cherednik's double affine Hecke algebras:
//! root data, q-series primitives, the coefficient recurrence, difference
//! operators, connection matrices, the quantum KZ cocycle and c-functions.

pub mod root_data;
pub mod qseries;
pub mod series;
pub mod harish_chandra;
pub mod operators;
pub mod connection;
pub mod sample;
pub mod qkz;
pub mod cfunction;
pub mod checks;
