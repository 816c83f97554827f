//! Synthetic time-tagged detection events from the biphoton model.

mod sampler;
mod stream;

pub use sampler::{sample_pair, PairSampler, SampledPair};
pub use stream::{generate_stream, SimConfig, SHARD_SECONDS};

use crate::error::{Error, Result};

/// One detection: channel 0 is detector 1, channel 1 detector 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventRecord {
    pub channel: u8,
    /// Picoseconds since the start of the acquisition.
    pub timestamp: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventStream {
    pub records: Vec<EventRecord>,
}

impl EventStream {
    pub fn new(records: Vec<EventRecord>) -> Self {
        Self { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn channel_counts(&self) -> [u64; 2] {
        let mut c = [0u64; 2];
        for r in &self.records {
            c[usize::from(r.channel.min(1))] += 1;
        }
        c
    }

    /// Fails on the first record out of timestamp order or with a channel
    /// other than 0/1.
    pub fn check_sorted(&self) -> Result<()> {
        for (i, r) in self.records.iter().enumerate() {
            if r.channel > 1 {
                return Err(Error::InvalidArgument(format!("record {i} has channel {}", r.channel)));
            }
            if i > 0 && r.timestamp < self.records[i - 1].timestamp {
                return Err(Error::UnsortedEvents(i));
            }
        }
        Ok(())
    }

    pub fn sort(&mut self) {
        self.records.sort_unstable_by_key(|r| (r.timestamp, r.channel));
    }
}
