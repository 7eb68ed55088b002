//! Butterfly pass kernels: full-array radix-R passes and the cache-blocked
//! phase that completes a transform inside a resident block buffer.
//!
//! Every pass is expressed through the same register-resident block round,
//! so all variants execute bit-identical butterfly sequences and differ only
//! in how work is grouped between passes.

use crate::modular::{harvey_butterfly, harvey_inv_butterfly, reduce_once, Modulus, MulOperand};

use super::NttTables;

/// One kernel round of a transform plan. A radix-`2^log_radix` pass covers
/// `log_radix` consecutive butterfly levels starting at `top_gap`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Pass {
    pub log_radix: u32,
    pub top_gap: usize,
    /// Whether the pass streams the whole main array (as opposed to running
    /// inside the cache-resident block phase).
    pub global: bool,
}

/// Decompose an `n`-point transform into radix passes. The first pass always
/// touches the main array; later passes join the blocked phase once their
/// top gap fits under `block_gap`.
pub(crate) fn plan_passes(n: usize, log_radix: u32, block_gap: Option<usize>) -> Vec<Pass> {
    let mut passes = Vec::new();
    let mut remaining = n.trailing_zeros();
    let mut gap = n >> 1;
    let mut first = true;
    while remaining > 0 {
        let chunk = log_radix.min(remaining);
        let global = match block_gap {
            None => true,
            Some(bg) => first || gap > bg,
        };
        passes.push(Pass {
            log_radix: chunk,
            top_gap: gap,
            global,
        });
        gap >>= chunk;
        remaining -= chunk;
        first = false;
    }
    passes
}

/// Forward butterfly network of `R` register-resident elements.
///
/// `twiddles` holds, per internal round `j`, the `2^j` operands of that
/// round, concatenated: `[w0][w10 w11][w20 w21 w22 w23]...`, `R - 1` total.
/// Internal round `j` pairs elements at distance `R >> (j+1)`: for radix 8
/// that is (i, i+4), then (0,2),(1,3),(4,6),(5,7), then consecutive pairs.
#[inline(always)]
pub(crate) fn block_forward<const R: usize>(
    regs: &mut [u64; R],
    twiddles: &[MulOperand],
    m: &Modulus,
) {
    let r = R.trailing_zeros();
    let mut tw_off = 0usize;
    for j in 0..r {
        let half = R >> (j + 1);
        let sub = half << 1;
        let mut base = 0;
        while base < R {
            let w = &twiddles[tw_off + base / sub];
            for i in base..base + half {
                let (a, b) = harvey_butterfly(regs[i], regs[i + half], w, m);
                regs[i] = a;
                regs[i + half] = b;
            }
            base += sub;
        }
        tw_off += 1 << j;
    }
}

/// Inverse counterpart of [`block_forward`]: Gentleman-Sande rounds from the
/// smallest pair distance up, consuming the same twiddle layout backwards.
///
/// When `scale` carries the folded `n^-1` operand, the topmost round fully
/// reduces and scales its outputs (the transform's final round).
#[inline(always)]
pub(crate) fn block_inverse<const R: usize>(
    regs: &mut [u64; R],
    twiddles: &[MulOperand],
    m: &Modulus,
    scale: Option<&MulOperand>,
) {
    let r = R.trailing_zeros();
    for j in (0..r).rev() {
        let tw_off = (1usize << j) - 1;
        let half = R >> (j + 1);
        let sub = half << 1;
        let mut base = 0;
        while base < R {
            let w = &twiddles[tw_off + base / sub];
            for i in base..base + half {
                if j == 0 {
                    if let Some(n_inv) = scale {
                        let x = regs[i];
                        let y = regs[i + half];
                        regs[i] = n_inv.mul(x + y, m);
                        regs[i + half] = w.mul(x + 2 * m.value() - y, m);
                        continue;
                    }
                }
                let (a, b) = harvey_inv_butterfly(regs[i], regs[i + half], w, m);
                regs[i] = a;
                regs[i + half] = b;
            }
            base += sub;
        }
    }
}

/// The three-internal-round radix-8 kernel: eight elements held in
/// registers, paired (i, i+4), then (0,2),(1,3),(4,6),(5,7), then
/// consecutively, each pairing through the lazy butterfly.
pub fn radix8_block_round(block: &mut [u64; 8], twiddles: &[MulOperand; 7], m: &Modulus) {
    block_forward::<8>(block, twiddles, m);
}

/// Two-internal-round radix-4 kernel, equivalent to two radix-2 levels.
pub fn radix4_block_round(block: &mut [u64; 4], twiddles: &[MulOperand; 3], m: &Modulus) {
    block_forward::<4>(block, twiddles, m);
}

/// Collect the forward twiddles a group starting at absolute index
/// `group_base` needs for one radix pass.
#[inline]
fn gather_forward(
    out: &mut [MulOperand],
    tables: &NttTables,
    group_base: usize,
    top_gap: usize,
    log_radix: u32,
) {
    let n = tables.n();
    let mut off = 0usize;
    for j in 0..log_radix {
        let l = top_gap >> j;
        let m_blocks = n / (2 * l);
        let first = m_blocks + group_base / (2 * l);
        for t in 0..(1usize << j) {
            out[off + t] = tables.forward_twiddle(first + t);
        }
        off += 1 << j;
    }
}

/// Collect the inverse twiddles for one group, in the forward layout
/// (consumed back to front by [`block_inverse`]).
#[inline]
fn gather_inverse(
    out: &mut [MulOperand],
    tables: &NttTables,
    group_base: usize,
    top_gap: usize,
    log_radix: u32,
) {
    let n = tables.n();
    let mut off = 0usize;
    for j in 0..log_radix {
        let l = top_gap >> j;
        let first = n - n / l + group_base / (2 * l);
        for t in 0..(1usize << j) {
            out[off + t] = tables.inverse_twiddle(first + t);
        }
        off += 1 << j;
    }
}

/// Run one forward radix pass over `region`, which covers absolute indices
/// `[abs_offset, abs_offset + region.len())` of the logical sequence.
/// `fuse_reduce` folds the final `[0,4p) -> [0,p)` offsetting into the pass.
pub(crate) fn forward_pass(
    region: &mut [u64],
    abs_offset: usize,
    tables: &NttTables,
    pass: &Pass,
    fuse_reduce: bool,
) {
    match pass.log_radix {
        1 => forward_pass_radix::<2>(region, abs_offset, tables, pass.top_gap, fuse_reduce),
        2 => forward_pass_radix::<4>(region, abs_offset, tables, pass.top_gap, fuse_reduce),
        3 => forward_pass_radix::<8>(region, abs_offset, tables, pass.top_gap, fuse_reduce),
        4 => forward_pass_radix::<16>(region, abs_offset, tables, pass.top_gap, fuse_reduce),
        lr => unreachable!("unsupported pass radix 2^{lr}"),
    }
}

fn forward_pass_radix<const R: usize>(
    region: &mut [u64],
    abs_offset: usize,
    tables: &NttTables,
    top_gap: usize,
    fuse_reduce: bool,
) {
    let m = tables.modulus();
    let p = m.value();
    let lane_gap = top_gap >> (R.trailing_zeros() - 1);
    let span = R * lane_gap; // == 2 * top_gap
    let mut twiddles = [tables.forward_twiddle(0); 15];
    let mut regs = [0u64; R];
    let mut base = 0usize;
    while base < region.len() {
        gather_forward(
            &mut twiddles,
            tables,
            abs_offset + base,
            top_gap,
            R.trailing_zeros(),
        );
        for lane in 0..lane_gap {
            for (i, reg) in regs.iter_mut().enumerate() {
                *reg = region[base + lane + i * lane_gap];
            }
            block_forward::<R>(&mut regs, &twiddles, m);
            if fuse_reduce {
                for reg in regs.iter_mut() {
                    *reg = reduce_once(reduce_once(*reg, 2 * p), p);
                }
            }
            for (i, reg) in regs.iter().enumerate() {
                region[base + lane + i * lane_gap] = *reg;
            }
        }
        base += span;
    }
}

/// Run one inverse radix pass over `region` (gaps ascend within the pass).
/// `fold_scale` applies the folded `n^-1` in the topmost round.
pub(crate) fn inverse_pass(
    region: &mut [u64],
    abs_offset: usize,
    tables: &NttTables,
    pass: &Pass,
    fold_scale: bool,
) {
    match pass.log_radix {
        1 => inverse_pass_radix::<2>(region, abs_offset, tables, pass.top_gap, fold_scale),
        2 => inverse_pass_radix::<4>(region, abs_offset, tables, pass.top_gap, fold_scale),
        3 => inverse_pass_radix::<8>(region, abs_offset, tables, pass.top_gap, fold_scale),
        4 => inverse_pass_radix::<16>(region, abs_offset, tables, pass.top_gap, fold_scale),
        lr => unreachable!("unsupported pass radix 2^{lr}"),
    }
}

fn inverse_pass_radix<const R: usize>(
    region: &mut [u64],
    abs_offset: usize,
    tables: &NttTables,
    top_gap: usize,
    fold_scale: bool,
) {
    let m = tables.modulus();
    let lane_gap = top_gap >> (R.trailing_zeros() - 1);
    let span = R * lane_gap;
    let mut twiddles = [tables.inverse_twiddle(0); 15];
    let mut regs = [0u64; R];
    let scale = fold_scale.then(|| tables.n_inv());
    let mut base = 0usize;
    while base < region.len() {
        gather_inverse(
            &mut twiddles,
            tables,
            abs_offset + base,
            top_gap,
            R.trailing_zeros(),
        );
        for lane in 0..lane_gap {
            for (i, reg) in regs.iter_mut().enumerate() {
                *reg = region[base + lane + i * lane_gap];
            }
            block_inverse::<R>(&mut regs, &twiddles, m, scale);
            for (i, reg) in regs.iter().enumerate() {
                region[base + lane + i * lane_gap] = *reg;
            }
        }
        base += span;
    }
}
