pub mod corpus;
pub mod hyperopt;
pub mod labels;
pub mod metrics;
pub mod network;
pub mod numeric;
pub mod run;
pub mod training;
