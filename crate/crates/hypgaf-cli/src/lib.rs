//! Library surface of the `hypgaf` command-line tool, exposed so the
//! integration tests can exercise record formatting and dispatch directly.

pub mod app;
pub mod record;
