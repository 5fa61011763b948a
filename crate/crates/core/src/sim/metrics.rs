use crate::sim::run::SlotMetrics;

/// Fixed-width histogram of per-vehicle per-slot queue lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueHistogram {
    pub bin_width: f64,
    /// `counts[i]` holds samples in `[i * bin_width, (i + 1) * bin_width)`.
    pub counts: Vec<u64>,
    pub samples: u64,
}

impl QueueHistogram {
    pub fn new(bin_width: f64) -> Self {
        assert!(bin_width > 0.0, "bin width must be positive");
        Self {
            bin_width,
            counts: Vec::new(),
            samples: 0,
        }
    }

    pub fn push(&mut self, q: f64) {
        let bin = (q.max(0.0) / self.bin_width) as usize;
        if bin >= self.counts.len() {
            self.counts.resize(bin + 1, 0);
        }
        self.counts[bin] += 1;
        self.samples += 1;
    }

    /// Adds the samples of `other`, which must share the bin width.
    pub fn merge(&mut self, other: &QueueHistogram) {
        assert_eq!(self.bin_width, other.bin_width, "bin widths differ");
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.samples += other.samples;
    }

    /// Upper edge of the bin holding the `p`-quantile, `p` in `[0, 1]`.
    /// Overestimates the exact quantile by at most one bin width.
    pub fn percentile(&self, p: f64) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        let rank = (p.clamp(0.0, 1.0) * self.samples as f64).ceil().max(1.0) as u64;
        let mut seen = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            seen += c;
            if seen >= rank {
                return (i + 1) as f64 * self.bin_width;
            }
        }
        self.counts.len() as f64 * self.bin_width
    }

    /// Fraction of samples at or above `threshold` (counted by bin).
    pub fn mass_above(&self, threshold: f64) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        let first = (threshold / self.bin_width).floor() as usize;
        let above: u64 = self.counts.iter().skip(first).sum();
        above as f64 / self.samples as f64
    }

    /// `(lower edge, upper edge, fraction)` for each bin.
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.samples.max(1) as f64;
        self.counts.iter().enumerate().map(move |(i, &c)| {
            (i as f64 * self.bin_width, (i + 1) as f64 * self.bin_width, c as f64 / n)
        })
    }
}

/// Aggregates of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub slots: u64,
    /// Backlog averaged over slots and vehicles (bits).
    pub avg_queue: f64,
    /// Energy per vehicle per slot (J).
    pub avg_energy: f64,
    /// `avg_queue^2 / 2 + V * avg_energy`.
    pub weighted_metric: f64,
    pub histogram: QueueHistogram,
}

/// Streaming fold of slot metrics into a [`Summary`].
#[derive(Debug, Clone)]
pub struct SummaryAccumulator {
    weight: f64,
    slots: u64,
    queue_sum: f64,
    energy_sum: f64,
    samples: u64,
    histogram: QueueHistogram,
}

pub const DEFAULT_BIN_WIDTH: f64 = 1e4;

impl SummaryAccumulator {
    pub fn new(weight: f64) -> Self {
        Self::with_bin_width(weight, DEFAULT_BIN_WIDTH)
    }

    pub fn with_bin_width(weight: f64, bin_width: f64) -> Self {
        Self {
            weight,
            slots: 0,
            queue_sum: 0.0,
            energy_sum: 0.0,
            samples: 0,
            histogram: QueueHistogram::new(bin_width),
        }
    }

    pub fn push(&mut self, m: &SlotMetrics) {
        self.push_raw(&m.queues, &m.energy);
    }

    pub fn push_raw(&mut self, queues: &[f64], energy: &[f64]) {
        self.slots += 1;
        self.samples += queues.len() as u64;
        for &q in queues {
            self.queue_sum += q;
            self.histogram.push(q);
        }
        self.energy_sum += energy.iter().sum::<f64>();
    }

    pub fn finish(self) -> Summary {
        let n = self.samples.max(1) as f64;
        let avg_queue = self.queue_sum / n;
        let avg_energy = self.energy_sum / n;
        Summary {
            slots: self.slots,
            avg_queue,
            avg_energy,
            weighted_metric: 0.5 * avg_queue * avg_queue + self.weight * avg_energy,
            histogram: self.histogram,
        }
    }
}

/// Summarizes a recorded stream.
pub fn metrics_summary<'a, I>(stream: I, weight: f64) -> Summary
where
    I: IntoIterator<Item = &'a SlotMetrics>,
{
    let mut acc = SummaryAccumulator::new(weight);
    for m in stream {
        acc.push(m);
    }
    acc.finish()
}
