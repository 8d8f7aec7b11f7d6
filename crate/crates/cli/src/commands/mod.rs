pub mod analytic;
pub mod simulate;
pub mod validate;
