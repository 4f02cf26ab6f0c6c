//! Succinct de Bruijn graphs in BOSS form and succinct Wheeler automata,
//! with small working-space merge procedures for both.
//!
//! Positions in every rank/select style API are 1-based. Node ids inside an
//! [`wheeler::Nfa`] are plain 0-based indices.

pub mod alphabet;
pub mod bitseq;
pub mod boss;
pub mod color;
pub mod dbg_merge;
pub mod format;
pub mod oracle;
pub mod par;
pub mod refine_merge;
pub mod sat_merge;
pub mod wheeler;

pub use alphabet::Alphabet;
pub use bitseq::{BitVec, PackedInts, RawBits, Sym, SymSeq, SENTINEL};
pub use boss::{build_boss, BossGraph};
pub use color::ColorMatrix;
pub use dbg_merge::{merge, merge_colored, merge_vo, MergeMode, MergeStats};
pub use par::Exec;
pub use refine_merge::{refine_merge, RefineOutcome};
pub use sat_merge::{sat_merge, SatOutcome};
pub use wheeler::{Nfa, WheelerGraph};
