pub mod api;
pub mod cli;
pub mod manifest;
pub mod run;
