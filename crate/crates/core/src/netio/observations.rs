use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::graph::Graph;
use crate::combinat::{binom, unrank_kset, KSet};
use crate::error::{Error, Result};
use crate::radon::{column_scale, SparseSignal};

/// Observation vector over the colex-ordered `j`-sets of `n` nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observations {
    pub n: usize,
    pub j: usize,
    pub values: Vec<f64>,
    pub noise_bound: Option<f64>,
}

impl Observations {
    pub fn new(n: usize, j: usize, values: Vec<f64>) -> Result<Self> {
        let expected = binom(n as u64, j as u64)? as usize;
        if values.len() != expected {
            return Err(Error::Dimension { expected, got: values.len() });
        }
        Ok(Self { n, j, values, noise_bound: None })
    }

    /// CSV rows `index,jset,value` with the `j`-set as space-separated nodes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,jset,value")?;
        for (i, v) in self.values.iter().enumerate() {
            let set = unrank_kset(i as u64, self.j)?;
            let nodes: Vec<String> = set.as_slice().iter().map(|x| x.to_string()).collect();
            writeln!(w, "{i},{},{v:.16e}", nodes.join(" "))?;
        }
        Ok(())
    }

    /// Header `n, j, length` as little-endian `u64`, then the values as
    /// little-endian `f64`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        for h in [self.n as u64, self.j as u64, self.values.len() as u64] {
            w.write_all(&h.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut header = [0u64; 3];
        for h in header.iter_mut() {
            r.read_exact(&mut word)?;
            *h = u64::from_le_bytes(word);
        }
        let [n, j, len] = header;
        let expected = binom(n, j)?;
        if expected != len {
            return Err(Error::Validation(format!("header length {len} does not match C({n},{j}) = {expected}")));
        }
        let mut values = Vec::with_capacity(len as usize);
        for _ in 0..len {
            r.read_exact(&mut word)?;
            values.push(f64::from_le_bytes(word));
        }
        Observations::new(n as usize, j as usize, values)
    }
}

/// Pair weights of a graph as a `j = 2` observation vector.
pub fn vectorize(graph: &Graph) -> Observations {
    Observations { n: graph.n(), j: 2, values: graph.pair_weights().to_vec(), noise_bound: None }
}

/// Inverse of [`vectorize`].
pub fn devectorize(obs: &Observations) -> Result<Graph> {
    if obs.j != 2 {
        return Err(Error::Precondition(format!("devectorize needs j = 2, got {}", obs.j)));
    }
    Graph::from_pair_weights(obs.n, obs.values.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallotCounts {
    pub observations: Observations,
    /// Ballots with fewer than `j` items.
    pub skipped: usize,
}

/// Number of ballots containing each `j`-set.
pub fn count_jsets(ballots: &[KSet], j: usize, n: usize) -> Result<BallotCounts> {
    let len = binom(n as u64, j as u64)? as usize;
    let mut values = vec![0.0; len];
    let mut skipped = 0;
    for b in ballots {
        if let Some(m) = b.max_element().filter(|&m| m >= n) {
            return Err(Error::InvalidKSet(format!("ballot item {m} outside {n} items")));
        }
        if b.len() < j {
            skipped += 1;
            continue;
        }
        b.for_each_subset_rank(j, |r| values[r] += 1.0);
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} ballots with fewer than {j} items");
    }
    Ok(BallotCounts { observations: Observations::new(n, j, values)?, skipped })
}

/// Which `j`-sets receive noise in [`gen_planted`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseScope {
    /// Every `j`-set.
    #[default]
    All,
    /// Only `j`-sets not inside any planted clique.
    OffSupport,
}

/// A planted-clique instance description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub n: usize,
    pub j: usize,
    /// Cliques with weights in dictionary (unit-column) units.
    pub cliques: Vec<(KSet, f64)>,
    pub noise: NoiseScope,
}

impl PlantedSpec {
    pub fn generate(&self, epsilon: f64, seed: u64) -> Result<(Observations, SparseSignal)> {
        gen_planted(self.n, self.j, &self.cliques, epsilon, seed, self.noise)
    }
}

/// Two disjoint 5-cliques on 10 nodes; every pair inside a team interacts
/// with strength 1, i.e. weight `sqrt(10)` on each unit column. Noise hits
/// the cross-team pairs only.
pub fn basketball_preset() -> PlantedSpec {
    let w = 1.0 / column_scale(5, 2);
    PlantedSpec {
        n: 10,
        j: 2,
        cliques: vec![(KSet::range(0, 5), w), (KSet::range(5, 5), w)],
        noise: NoiseScope::OffSupport,
    }
}

/// `b = A x0 + z` with `z` uniform on `[-epsilon, epsilon]` from a ChaCha20
/// stream seeded by `seed`. Noise values are drawn in colex order of the
/// affected `j`-sets.
pub fn gen_planted(
    n: usize,
    j: usize,
    cliques: &[(KSet, f64)],
    epsilon: f64,
    seed: u64,
    noise: NoiseScope,
) -> Result<(Observations, SparseSignal)> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::Precondition(format!("epsilon must be finite and nonnegative, got {epsilon}")));
    }
    let len = binom(n as u64, j as u64)? as usize;
    let mut values = vec![0.0; len];
    let mut on_support = vec![false; len];
    let mut truth = SparseSignal::new();
    for (c, w) in cliques {
        if !(*w > 0.0) {
            return Err(Error::Precondition(format!("planted weight {w} must be positive")));
        }
        if c.len() < j || c.max_element().is_some_and(|m| m >= n) {
            return Err(Error::InvalidKSet(format!("planted clique {c} does not fit n={n}, j={j}")));
        }
        let v = w * column_scale(c.len(), j);
        c.for_each_subset_rank(j, |r| {
            values[r] += v;
            on_support[r] = true;
        });
        truth.add(c.clone(), *w);
    }
    if epsilon > 0.0 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for (r, v) in values.iter_mut().enumerate() {
            if noise == NoiseScope::OffSupport && on_support[r] {
                continue;
            }
            *v += rng.random_range(-epsilon..=epsilon);
        }
    }
    let mut obs = Observations::new(n, j, values)?;
    obs.noise_bound = Some(epsilon);
    Ok((obs, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radon::CliqueDictionary;

    #[test]
    fn triangle_vector() {
        let g = Graph::from_pair_weights(3, vec![1.0; 3]).unwrap();
        let o = vectorize(&g);
        assert_eq!(o.values, vec![1.0, 1.0, 1.0]);
        assert_eq!(devectorize(&o).unwrap(), g);
        assert_eq!(vectorize(&Graph::new(10)).values.len(), 45);
    }

    #[test]
    fn ballots() {
        let b = vec![KSet::new(vec![0, 1, 2]).unwrap()];
        let c = count_jsets(&b, 2, 4).unwrap();
        assert_eq!(c.observations.values, vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        let two = count_jsets(&[b[0].clone(), b[0].clone(), KSet::new(vec![3]).unwrap()], 2, 4).unwrap();
        assert_eq!(two.observations.values[0], 2.0);
        assert_eq!(two.skipped, 1);
        assert!(count_jsets(&[KSet::new(vec![0, 9]).unwrap()], 2, 4).is_err());
    }

    #[test]
    fn planted_noise_bound_and_reproducibility() {
        let spec = basketball_preset();
        let dict = CliqueDictionary::enumerate_full(10, 2, 5).unwrap();
        let (clean, x0) = spec.generate(0.0, 1).unwrap();
        assert_eq!(clean.values, dict.apply(&x0));
        assert!(clean.values.iter().all(|&v| v == 0.0 || (v - 1.0).abs() < 1e-15));
        let (a, _) = spec.generate(0.5, 7).unwrap();
        let (b, _) = spec.generate(0.5, 7).unwrap();
        assert_eq!(a, b);
        for (x, y) in a.values.iter().zip(&clean.values) {
            assert!((x - y).abs() <= 0.5);
        }
        // support pairs untouched
        assert_eq!(a.values[0], clean.values[0]);
        let (c, _) = gen_planted(10, 2, &spec.cliques, 0.5, 7, NoiseScope::All).unwrap();
        assert_ne!(c.values[0], clean.values[0]);
    }

    #[test]
    fn binary_and_csv() {
        let o = Observations::new(4, 2, vec![0.5, -1.0, 2.0, 0.0, 1e-300, 3.0]).unwrap();
        let mut buf = Vec::new();
        o.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 48);
        assert_eq!(Observations::read_binary(&buf[..]).unwrap(), o);
        let mut csv = Vec::new();
        o.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("index,jset,value\n0,0 1,5.0000000000000000e-1\n"));
    }
}
