#![allow(dead_code)]

pub mod progs;
pub mod reference;
pub mod smtlib;
pub mod walkers;
