//! Successive cancellation list decoding over the polar factor graph,
//! stopped early at a chosen index.
//!
//! LLRs are propagated with the min-sum check rule and the usual variable
//! rule. The path metric adds `|LLR|` whenever the decided bit (v-domain for
//! PAC codes) disagrees with the sign of its LLR.

use crate::codes::{BitVec, CodeSpec};
use crate::error::{Error, Result};

/// A surviving list path: u-domain decisions `u_0..=u_stop` and its metric.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderPath {
    pub u_bits: BitVec,
    pub metric: f64,
}

/// Layout of the per-path decoding tree. Layer `λ ≥ 1` holds `N >> λ`
/// blocks; block `s` of layer `λ` combines blocks `2s` and `2s+1` of layer
/// `λ − 1`. Layer 0 is the channel.
struct Layout {
    n: usize,
    levels: usize,
    offset: Vec<usize>,
}

impl Layout {
    fn new(n: usize) -> Self {
        let levels = n.trailing_zeros() as usize;
        let mut offset = vec![0; levels + 1];
        for lam in 2..=levels {
            offset[lam] = offset[lam - 1] + (n >> (lam - 1));
        }
        Layout { n, levels, offset }
    }

    fn size(&self) -> usize {
        self.n.saturating_sub(1).max(1)
    }
}

#[derive(Clone, Default)]
struct PathState {
    llr: Vec<f64>,
    partial: Vec<[u8; 2]>,
    u: Vec<u8>,
    v: Vec<u8>,
    metric: f64,
}

impl PathState {
    fn new(layout: &Layout, capacity: usize) -> Self {
        PathState {
            llr: vec![0.0; layout.size()],
            partial: vec![[0, 0]; layout.size()],
            u: Vec::with_capacity(capacity),
            v: Vec::with_capacity(capacity),
            metric: 0.0,
        }
    }

    fn read(&self, layout: &Layout, channel: &[f64], lam: usize, s: usize) -> f64 {
        if lam == 0 {
            channel[s]
        } else {
            self.llr[layout.offset[lam] + s]
        }
    }

    fn calc(&mut self, layout: &Layout, channel: &[f64], lam: usize, phase: usize) {
        if lam == 0 {
            return;
        }
        if phase % 2 == 0 {
            self.calc(layout, channel, lam - 1, phase >> 1);
        }
        let base = layout.offset[lam];
        for s in 0..(layout.n >> lam) {
            let a = self.read(layout, channel, lam - 1, 2 * s);
            let b = self.read(layout, channel, lam - 1, 2 * s + 1);
            self.llr[base + s] = if phase % 2 == 0 {
                a.signum() * b.signum() * a.abs().min(b.abs())
            } else if self.partial[base + s][0] == 0 {
                b + a
            } else {
                b - a
            };
        }
    }

    fn update(&mut self, layout: &Layout, lam: usize, phase: usize) {
        if lam <= 1 {
            return;
        }
        let child = phase >> 1;
        let base = layout.offset[lam];
        let below = layout.offset[lam - 1];
        for s in 0..(layout.n >> lam) {
            let [even, odd] = self.partial[base + s];
            self.partial[below + 2 * s][child & 1] = even ^ odd;
            self.partial[below + 2 * s + 1][child & 1] = odd;
        }
        if child % 2 == 1 {
            self.update(layout, lam - 1, child);
        }
    }

    /// LLR of the next input bit.
    fn next_llr(&mut self, layout: &Layout, channel: &[f64]) -> f64 {
        let phase = self.u.len();
        if layout.levels == 0 {
            return channel[0];
        }
        self.calc(layout, channel, layout.levels, phase);
        self.llr[layout.offset[layout.levels]]
    }

    fn commit(&mut self, layout: &Layout, u: u8, v: u8) {
        let phase = self.u.len();
        self.u.push(u);
        self.v.push(v);
        if layout.levels == 0 {
            return;
        }
        let top = layout.offset[layout.levels];
        self.partial[top][phase & 1] = v;
        if phase % 2 == 1 {
            self.update(layout, layout.levels, phase);
        }
    }
}

fn penalty(bit: u8, llr: f64) -> f64 {
    if bit != (llr < 0.0) as u8 {
        llr.abs()
    } else {
        0.0
    }
}

/// v-domain bit produced by appending `u` to the path's u-history.
fn precoded_bit(code: &CodeSpec, history: &[u8], u: u8) -> u8 {
    match code.precoder() {
        None => u,
        Some(c) => {
            let c = c.coeffs();
            let i = history.len();
            let mut v = c[0] & u;
            for l in 1..c.len().min(i + 1) {
                v ^= c[l] & history[i - l];
            }
            v
        }
    }
}

/// Runs list decoding up to and including `stop_index`, returning at most
/// `list_size` paths sorted by metric. Frozen bits are forced to zero in the
/// u-domain. Ties are broken by the position of the parent path in the list
/// and then by the decided bit (0 first), which keeps the result
/// deterministic.
pub fn scl_decode_partial(
    code: &CodeSpec,
    channel_llrs: &[f64],
    list_size: usize,
    stop_index: usize,
) -> Result<Vec<DecoderPath>> {
    let n = code.length();
    if list_size == 0 {
        return Err(Error::ZeroListSize);
    }
    if channel_llrs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: channel_llrs.len(),
        });
    }
    if stop_index >= n {
        return Err(Error::PrefixTooLong {
            len: stop_index + 1,
            n,
        });
    }
    let layout = Layout::new(n);
    let mut paths = vec![PathState::new(&layout, stop_index + 1)];

    for i in 0..=stop_index {
        let llrs: Vec<f64> = paths
            .iter_mut()
            .map(|p| p.next_llr(&layout, channel_llrs))
            .collect();
        if code.is_frozen(i) {
            for (p, &llr) in paths.iter_mut().zip(&llrs) {
                let v = precoded_bit(code, &p.u, 0);
                p.metric += penalty(v, llr);
                p.commit(&layout, 0, v);
            }
            continue;
        }

        // (metric, parent, u, v) in parent order, bit 0 first
        let mut candidates: Vec<(f64, usize, u8, u8)> = Vec::with_capacity(2 * paths.len());
        for (idx, (p, &llr)) in paths.iter().zip(&llrs).enumerate() {
            for u in 0..2u8 {
                let v = precoded_bit(code, &p.u, u);
                candidates.push((p.metric + penalty(v, llr), idx, u, v));
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
        candidates.truncate(list_size);

        let mut uses = vec![0usize; paths.len()];
        for c in &candidates {
            uses[c.1] += 1;
        }
        let mut next = Vec::with_capacity(candidates.len());
        for &(metric, parent, u, v) in &candidates {
            uses[parent] -= 1;
            let mut child = if uses[parent] == 0 {
                std::mem::take(&mut paths[parent])
            } else {
                paths[parent].clone()
            };
            child.metric = metric;
            child.commit(&layout, u, v);
            next.push(child);
        }
        paths = next;
    }

    paths.sort_by(|a, b| a.metric.total_cmp(&b.metric));
    Ok(paths
        .into_iter()
        .map(|p| DecoderPath {
            u_bits: BitVec::from_raw(p.u),
            metric: p.metric,
        })
        .collect())
}
