//! Static detection of feature-interaction bugs in `#ifdef`-configurable C
//! code, and configuration prioritization driven by what it finds.

pub mod conditions;
pub mod config;
pub mod error;
pub mod facts;
pub mod formats;
pub mod interactions;
pub mod metrics;
pub mod oracle;
pub mod ranking;
pub mod sampling;
pub mod varfront;

pub use conditions::{FeatureModel, Formula};
pub use config::{Configuration, Literal, OptionSet, PartialAssignment};
pub use error::{Error, Location, Result};
pub use facts::{Membership, SelectionTables, Selector, Sets};
pub use interactions::{Interaction, InteractionKind, Side, SuspiciousSelection, Violation};
pub use metrics::{BugSpec, EvalReport};
pub use ranking::{RankedConfiguration, Strategy};
pub use sampling::{Sample, SamplePlan};
pub use varfront::{Entity, EntityKind, FrontendConfig, Op, OperationRecord, SourceUnit};
