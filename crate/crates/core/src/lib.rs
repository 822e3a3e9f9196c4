//! Energy bookkeeping for open and driven quantum systems.

pub mod accounting;
pub mod channels;
pub mod io;
pub mod linalg;
pub mod qstate;
pub mod scenarios;
pub mod verification;
