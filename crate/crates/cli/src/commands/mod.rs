pub mod ld_study;
pub mod report;
pub mod scale_opt;
pub mod sensitivity;
