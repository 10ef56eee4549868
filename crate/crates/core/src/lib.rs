pub mod addr;
pub mod alias;
pub mod classify;
pub mod gan;
pub mod metrics;
pub mod nn;
pub mod oracle;
pub mod pipeline;
