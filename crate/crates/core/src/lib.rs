//! Security-aware controller synthesis for LTL tasks on turn-based
//! stochastic games under actuation attacks.

pub mod automata;
pub mod cli;
pub mod game;
pub mod learn;
pub mod ltl;
pub mod product;
pub mod verify;
