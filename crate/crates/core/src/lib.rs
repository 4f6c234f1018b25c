pub mod asymptotics;
pub mod blowup;
pub mod casebook;
pub mod flow;
pub mod normalform;
pub mod polyfield;
