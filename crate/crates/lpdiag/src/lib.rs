//! Front ends for `lpdiag-core`: bounds and oracle-script formats, a
//! terminal oracle, the command implementations behind the `lpdiag`
//! binary, and the HTTP session service.

pub mod bounds;
pub mod commands;
pub mod diagnosis;
pub mod script;
pub mod service;
pub mod terminal;
pub mod wire;

/// Specification of the `isort/2` and `insert/3` fixtures.
pub const BUNDLED_SPEC: &str = include_str!("../../../fixtures/isort.spec.pl");
