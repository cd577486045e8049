//! Permutation mutation operators and the uniform-like crossover (ULX).
//!
//! These replace continuous tumble-and-move chemotaxis: a bacterium "moves"
//! by mutating its permutation. All operators return a fresh permutation and
//! leave their input untouched.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::qap::Permutation;
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MutationKind {
    /// Exchange two random positions.
    #[default]
    Swap,
    /// Split into three contiguous blocks and exchange two of them.
    PThird,
    /// Reverse a random segment.
    Inversion,
}

impl MutationKind {
    pub const ALL: [MutationKind; 3] = [Self::Swap, Self::PThird, Self::Inversion];

    /// Smallest permutation size the operator accepts.
    pub fn min_size(self) -> usize {
        match self {
            Self::PThird => 3,
            Self::Swap | Self::Inversion => 2,
        }
    }

    pub fn apply(self, perm: &Permutation, rng: &mut RandomSource) -> Result<Permutation> {
        match self {
            Self::Swap => mutate_swap(perm, rng),
            Self::PThird => mutate_p3(perm, rng),
            Self::Inversion => mutate_inversion(perm, rng),
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Swap => "swap",
            Self::PThird => "p3",
            Self::Inversion => "inversion",
        })
    }
}

impl FromStr for MutationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "swap" => Ok(Self::Swap),
            "p3" | "p/3" | "p_over_3" => Ok(Self::PThird),
            "inversion" | "inv" => Ok(Self::Inversion),
            other => Err(Error::invalid(format!(
                "unknown mutation '{other}' (expected swap, p3 or inversion)"
            ))),
        }
    }
}

fn require_len(perm: &Permutation, min: usize, op: &str) -> Result<()> {
    if perm.len() < min {
        return Err(Error::invalid(format!(
            "{op} needs n >= {min}, got n = {}",
            perm.len()
        )));
    }
    Ok(())
}

pub fn mutate_swap(perm: &Permutation, rng: &mut RandomSource) -> Result<Permutation> {
    require_len(perm, 2, "swap mutation")?;
    let (a, b) = rng.distinct_pair(perm.len());
    Ok(swap_positions(perm, a, b))
}

pub fn swap_positions(perm: &Permutation, a: usize, b: usize) -> Permutation {
    let mut out = perm.clone();
    out.swap(a, b);
    out
}

/// Block boundaries for the p/3 operator: three contiguous ranges whose sizes
/// differ by at most one, larger blocks first.
pub fn p3_blocks(n: usize) -> [std::ops::Range<usize>; 3] {
    let base = n / 3;
    let rem = n % 3;
    let len = |b: usize| base + usize::from(b < rem);
    let s1 = len(0);
    let s2 = s1 + len(1);
    [0..s1, s1..s2, s2..n]
}

pub fn mutate_p3(perm: &Permutation, rng: &mut RandomSource) -> Result<Permutation> {
    require_len(perm, 3, "p/3 mutation")?;
    let (a, b) = rng.distinct_pair(3);
    exchange_blocks(perm, a, b)
}

/// Exchanges p/3 blocks `a` and `b` (0-based block indices). When lengths
/// differ, the shorter block is exchanged with the equal-length prefix of the
/// longer one.
pub fn exchange_blocks(perm: &Permutation, a: usize, b: usize) -> Result<Permutation> {
    require_len(perm, 3, "p/3 mutation")?;
    if a > 2 || b > 2 || a == b {
        return Err(Error::invalid(format!(
            "block indices must be distinct in 0..3, got ({a}, {b})"
        )));
    }
    let blocks = p3_blocks(perm.len());
    let (x, y) = (&blocks[a], &blocks[b]);
    let width = x.len().min(y.len());
    let mut out = perm.clone();
    for k in 0..width {
        out.swap(x.start + k, y.start + k);
    }
    Ok(out)
}

pub fn mutate_inversion(perm: &Permutation, rng: &mut RandomSource) -> Result<Permutation> {
    require_len(perm, 2, "inversion mutation")?;
    let n = perm.len();
    let x = rng.index(n);
    let y = rng.index(n);
    invert_range(perm, x.min(y), x.max(y))
}

/// Reverses the inclusive segment `[a, b]`.
pub fn invert_range(perm: &Permutation, a: usize, b: usize) -> Result<Permutation> {
    if a > b || b >= perm.len() {
        return Err(Error::invalid(format!(
            "inversion range [{a}, {b}] invalid for n = {}",
            perm.len()
        )));
    }
    let mut out = perm.clone();
    out.as_mut_slice()[a..=b].reverse();
    Ok(out)
}

/// Uniform-like crossover.
///
/// Positions where the parents agree are inherited directly. Remaining
/// positions are filled left to right from alternating donors, starting with
/// a randomly chosen parent. A donated value already present in the child
/// falls back to the other parent's value at that position, and failing that
/// to a uniformly random unused value.
pub fn crossover_ulx(
    parent_a: &Permutation,
    parent_b: &Permutation,
    rng: &mut RandomSource,
) -> Result<Permutation> {
    let n = parent_a.len();
    if parent_b.len() != n {
        return Err(Error::invalid(format!(
            "parents have different sizes {} and {}",
            n,
            parent_b.len()
        )));
    }
    let (a, b) = (parent_a.as_slice(), parent_b.as_slice());
    let mut child: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    for i in 0..n {
        if a[i] == b[i] {
            child[i] = Some(a[i]);
            used[a[i]] = true;
        }
    }

    let mut donor_is_a = rng.coin();
    for i in 0..n {
        if child[i].is_some() {
            continue;
        }
        let (first, second) = if donor_is_a {
            (a[i], b[i])
        } else {
            (b[i], a[i])
        };
        let value = if !used[first] {
            first
        } else if !used[second] {
            second
        } else {
            let free: Vec<usize> = (0..n).filter(|&v| !used[v]).collect();
            free[rng.index(free.len())]
        };
        child[i] = Some(value);
        used[value] = true;
        donor_is_a = !donor_is_a;
    }

    Ok(Permutation::from_vec_unchecked(
        child
            .into_iter()
            .map(|v| v.expect("every position filled"))
            .collect(),
    ))
}
