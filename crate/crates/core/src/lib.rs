pub mod algebra;
pub mod eqdsl;
pub mod maps;
pub mod solver;
pub mod symbolic;
pub mod theorems;
