use crate::rng::stream;
use rand::seq::SliceRandom;

const MAX_ATTEMPTS: usize = 100_000;
const PLAIN_ATTEMPTS: usize = 10_000;

/// Target spread `floor(√(l/2))`.
pub fn default_spread(l: usize) -> usize {
    ((l as f64 / 2.0).sqrt() + 1e-12).floor() as usize
}

/// A permutation with `|π(i) - π(j)| ≥ s` whenever `0 < |i - j| < s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    pub perm: Vec<usize>,
    pub spread: usize,
}

impl Interleaver {
    /// `out[i] = x[π(i)]`.
    pub fn apply<T: Copy>(&self, x: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| x[p]).collect()
    }

    /// Inverse of [`Interleaver::apply`].
    pub fn invert<T: Copy + Default>(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); x.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = x[i];
        }
        out
    }
}

/// Checks the S-separation property exhaustively.
pub fn has_spread(perm: &[usize], s: usize) -> bool {
    (0..perm.len()).all(|i| (i + 1..perm.len().min(i + s)).all(|j| perm[i].abs_diff(perm[j]) >= s))
}

/// S-random interleaver of length `l`.
///
/// Positions are filled in order, each with the first element of a shuffled
/// pool that keeps the spread against the previous `s - 1` picks; a dead end
/// reshuffles and starts over. If `1e4` plain attempts fail, dead ends are
/// repaired instead by moving an earlier entry to the current position when
/// some pool entry can take its place. Repaired permutations decode worse, so
/// they are only a fallback. After `1e5` further failures the spread drops by
/// one and a warning is logged.
pub fn s_random_interleaver(l: usize, seed: u64) -> Interleaver {
    assert!(l >= 8, "interleaver length must be at least 8");
    let mut s = default_spread(l);
    let mut attempt = 0u64;
    loop {
        for n in 0..PLAIN_ATTEMPTS + MAX_ATTEMPTS {
            let mut rng = stream(seed, attempt);
            attempt += 1;
            if let Some(perm) = try_build(l, s, &mut rng, n >= PLAIN_ATTEMPTS) {
                return Interleaver { perm, spread: s };
            }
        }
        log::warn!("no S-random permutation of length {l} with S = {s} after {MAX_ATTEMPTS} attempts; trying S = {}", s - 1);
        s -= 1;
    }
}

fn try_build<R: rand::Rng>(l: usize, s: usize, rng: &mut R, repair: bool) -> Option<Vec<usize>> {
    let mut pool: Vec<usize> = (0..l).collect();
    pool.shuffle(rng);
    let mut perm: Vec<usize> = Vec::with_capacity(l);
    let fits = |perm: &[usize], pos: usize, v: usize, skip: Option<usize>| {
        let lo = pos.saturating_sub(s - 1);
        let hi = (pos + s).min(perm.len());
        (lo..hi).filter(|&j| j != pos && Some(j) != skip).all(|j| perm[j].abs_diff(v) >= s)
    };
    for i in 0..l {
        if let Some(k) = pool.iter().position(|&v| fits(&perm, i, v, None)) {
            perm.push(pool.swap_remove(k));
            continue;
        }
        if !repair {
            return None;
        }
        // dead end: move an earlier entry here and put a pool entry in its place
        let window_start = i.saturating_sub(s - 1);
        let swap = (0..window_start).find_map(|j| {
            let moved = perm[j];
            if !fits(&perm, i, moved, None) {
                return None;
            }
            let k = pool.iter().position(|&v| fits(&perm, j, v, Some(i)))?;
            Some((j, k))
        })?;
        let (j, k) = swap;
        let moved = perm[j];
        perm[j] = pool.swap_remove(k);
        perm.push(moved);
    }
    Some(perm)
}
