pub mod canon;
pub mod counter;
pub mod dfa;
pub mod epset;
pub mod lasso;
pub mod reach;
pub mod relation;
