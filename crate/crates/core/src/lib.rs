//! Desk-scale toolkit for the mathematics of the set-theoretic multiverse:
//! the modal logic of forcing over finite Kripke frames, the
//! buttons-and-switches toy multiverse, finite Boolean-valued models with
//! ultrafilter quotients, and geology over abstract multiverse graphs.

pub mod boolean;
pub mod cli;
pub mod forcing;
pub mod geology;
pub mod kripke;
pub mod limits;
pub mod syntax;
pub mod theories;
pub mod worldset;

pub use kripke::{eval, valid_on_frame, Frame, FrameClass, KripkeError, KripkeModel};
pub use limits::Limits;
pub use syntax::{parse_formula, render_formula, AxiomScheme, Formula};
pub use worldset::WorldSet;
