//! The book's chapters, compiled as doc-tests so that every snippet keeps
//! building against the current library. One module per chapter, so a failing
//! doc-test names its chapter.

#[doc = include_str!("../../../book/src/overview.md")]
pub mod overview {}
#[doc = include_str!("../../../book/src/specs.md")]
pub mod specs {}
#[doc = include_str!("../../../book/src/assertions.md")]
pub mod assertions {}
#[doc = include_str!("../../../book/src/simulators.md")]
pub mod simulators {}
#[doc = include_str!("../../../book/src/triage.md")]
pub mod triage {}
#[doc = include_str!("../../../book/src/loop.md")]
pub mod repair_loop {}
#[doc = include_str!("../../../book/src/reports.md")]
pub mod reports {}
#[doc = include_str!("../../../book/src/configuration.md")]
pub mod configuration {}
