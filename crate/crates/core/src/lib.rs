//! # chronotag
//!
//! Temporal expression extraction: a linear-chain CRF identifies time
//! expressions as BIO-labelled token spans, a lexical post-processing
//! pipeline corrects its output, and a rule engine normalizes each expression
//! to a TIMEX3 `type` and `value` anchored to the document creation time.
//!
//! ```
//! use chronotag::corpus::{tokenize, Label};
//! use chronotag::normalizer::{Anchor, Normalizer, TimexType};
//!
//! let tokens = tokenize("Three days ago.");
//! let words: Vec<&str> = tokens.iter().map(|t| t.surface.as_str()).collect();
//! assert_eq!(words, ["Three", "days", "ago", "."]);
//!
//! let anchor: Anchor = "2013-04-11".parse().unwrap();
//! let norm = Normalizer::default().normalize(&words[..3], &anchor).unwrap();
//! assert_eq!(norm.timex_type, TimexType::Date);
//! assert_eq!(norm.value, "2013-04-08");
//! # let _ = Label::B;
//! ```
//!
//! The guide in `book/` walks through each stage; its code listings are
//! compiled and run as doctests of this crate.

pub mod config;
pub mod corpus;
pub mod crf;
mod error;
pub mod eval;
pub mod features;
pub mod normalizer;
pub mod pipeline;
pub mod postproc;
pub mod synth;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/crf.md")]
    mod crf {}
    #[doc = include_str!("../../../book/src/postproc.md")]
    mod postproc {}
    #[doc = include_str!("../../../book/src/normalization.md")]
    mod normalization {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
