use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CombKernelSpec, Kernel, LongMemoryKernelSpec, MarkovKernelSpec, ThreeLetterKernelSpec};
use crate::error::Result;

/// JSON kernel document: `{"kernel": "<kind>", "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Comb(CombKernelSpec),
    LongMemory(LongMemoryKernelSpec),
    ThreeLetter(ThreeLetterKernelSpec),
    Markov(MarkovKernelSpec),
}

impl KernelSpec {
    pub fn build(&self) -> Result<Arc<dyn Kernel>> {
        Ok(match self {
            KernelSpec::Comb(s) => Arc::new(s.build()?),
            KernelSpec::LongMemory(s) => Arc::new(s.build()?),
            KernelSpec::ThreeLetter(s) => Arc::new(s.build()?),
            KernelSpec::Markov(s) => Arc::new(s.build()?),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            KernelSpec::Comb(_) => "comb",
            KernelSpec::LongMemory(_) => "long_memory",
            KernelSpec::ThreeLetter(_) => "three_letter",
            KernelSpec::Markov(_) => "markov",
        }
    }
}
