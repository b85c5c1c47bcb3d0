//! HTTP session service and command-line front end for [`imt_core`].
//!
//! [`session`] exposes live interactive sessions to a browser; [`cli`] is the
//! `imt` command.

pub mod cli;
pub mod session;
