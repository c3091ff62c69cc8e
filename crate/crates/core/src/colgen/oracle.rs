//! Pricing: find a clique column `tau` outside the working set with
//! `|<A_tau, g>| > 1`.

use std::collections::HashSet;

use crate::combinat::{binom, KSet, KSubsets};
use crate::error::{Error, Result};
use crate::radon::{column_dot, column_scale};

/// Default violation tolerance.
pub const VIOL_TOL: f64 = 1e-7;

/// Signed view of a vector over the colex-ordered `j`-sets of `n` nodes.
#[derive(Debug, Clone)]
pub struct JsetWeights<'a> {
    n: usize,
    j: usize,
    values: &'a [f64],
    sign: f64,
    // binom[a * (j + 1) + b] = C(a, b)
    binom: Vec<usize>,
}

impl<'a> JsetWeights<'a> {
    pub fn new(n: usize, j: usize, values: &'a [f64]) -> Result<Self> {
        if j == 0 || j > n {
            return Err(Error::Precondition(format!("need 1 <= j <= n, got j={j}, n={n}")));
        }
        let len = binom(n as u64, j as u64)? as usize;
        if values.len() != len {
            return Err(Error::Dimension { expected: len, got: values.len() });
        }
        let mut table = vec![0usize; (n + 1) * (j + 1)];
        for a in 0..=n {
            table[a * (j + 1)] = 1;
            for b in 1..=j.min(a) {
                let left = if b < a { table[(a - 1) * (j + 1) + b] } else { 0 };
                table[a * (j + 1) + b] = table[(a - 1) * (j + 1) + b - 1] + left;
            }
        }
        Ok(Self { n, j, values, sign: 1.0, binom: table })
    }

    /// The same weights with flipped sign.
    pub fn negated(&self) -> Self {
        Self { sign: -self.sign, ..self.clone() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn j(&self) -> usize {
        self.j
    }

    /// Weight of a sorted `j`-set.
    #[inline]
    fn weight_sorted(&self, set: &[usize]) -> f64 {
        let mut r = 0;
        for (i, &c) in set.iter().enumerate() {
            r += self.binom[c * (self.j + 1) + i + 1];
        }
        self.sign * self.values[r]
    }

    /// Weight of a `j`-set given in any order.
    pub fn weight(&self, set: &[usize]) -> f64 {
        let mut s = set.to_vec();
        s.sort_unstable();
        self.weight_sorted(&s)
    }

    #[inline]
    fn pair(&self, u: usize, v: usize) -> f64 {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.sign * self.values[b * (b - 1) / 2 + a]
    }

    /// Weight of `base ∪ extra` where `base` is sorted and disjoint from `extra`.
    fn weight_union(&self, base: &[usize], extra: &[usize], buf: &mut Vec<usize>) -> f64 {
        buf.clear();
        buf.extend_from_slice(base);
        buf.extend_from_slice(extra);
        buf.sort_unstable();
        self.weight_sorted(buf)
    }
}

/// Greedy growth from `start`: members in insertion order and the score of
/// every prefix (sizes `1..=kmax`, fewer if `n` runs out).
pub(crate) fn greedy_prefixes(w: &JsetWeights, kmax: usize, start: usize) -> Vec<(Vec<usize>, f64)> {
    let (n, j) = (w.n, w.j);
    let mut members = vec![start];
    let mut inside = vec![false; n];
    inside[start] = true;
    let mut gain = vec![0.0; n];
    let mut score = 0.0;
    let mut buf = Vec::with_capacity(j);
    let mut out = vec![(members.clone(), if j == 1 { w.weight_sorted(&[start]) } else { 0.0 })];
    if j == 1 {
        score = out[0].1;
        for (v, g) in gain.iter_mut().enumerate() {
            *g = w.weight_sorted(&[v]);
        }
    } else if j == 2 {
        for (v, g) in gain.iter_mut().enumerate() {
            if v != start {
                *g = w.pair(start, v);
            }
        }
    }
    while members.len() < kmax.min(n) {
        let before = members.len();
        let choice = if before + 1 < j {
            // too small for any j-subset: rank by the j-sets the node would open up
            let look = lookahead(w, &members, &inside, &mut buf);
            argmax(&look, &inside)
        } else {
            argmax(&gain, &inside)
        };
        let Some(u) = choice else { break };
        if before + 1 >= j {
            score += gain[u];
        }
        let mut sorted_old = members.clone();
        sorted_old.sort_unstable();
        members.push(u);
        inside[u] = true;
        let after = members.len();
        if after + 1 == j {
            let mut sorted = members.clone();
            sorted.sort_unstable();
            for v in (0..n).filter(|&v| !inside[v]) {
                gain[v] = w.weight_union(&sorted, &[v], &mut buf);
            }
        } else if after >= j {
            if j == 2 {
                for v in (0..n).filter(|&v| !inside[v]) {
                    gain[v] += w.pair(u, v);
                }
            } else {
                let rhos: Vec<KSet> = if j == 1 { Vec::new() } else { KSubsets::new(sorted_old.len(), j - 2).collect() };
                for v in (0..n).filter(|&v| !inside[v]) {
                    for rho in &rhos {
                        let base: Vec<usize> = rho.as_slice().iter().map(|&i| sorted_old[i]).collect();
                        gain[v] += w.weight_union(&base, &[u, v], &mut buf);
                    }
                }
            }
        }
        out.push((members.clone(), score));
    }
    out
}

fn argmax(values: &[f64], inside: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (v, &x) in values.iter().enumerate() {
        if inside[v] {
            continue;
        }
        if best.is_none_or(|b| x > values[b]) {
            best = Some(v);
        }
    }
    best
}

fn lookahead(w: &JsetWeights, members: &[usize], inside: &[bool], buf: &mut Vec<usize>) -> Vec<f64> {
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    let outside: Vec<usize> = (0..w.n).filter(|&v| !inside[v]).collect();
    let mut look = vec![0.0; w.n];
    for t in KSubsets::new(outside.len(), w.j - members.len()) {
        let extra: Vec<usize> = t.as_slice().iter().map(|&i| outside[i]).collect();
        let val = w.weight_union(&sorted, &extra, buf);
        for &v in &extra {
            look[v] += val;
        }
    }
    look
}

/// Greedy maximum-weight clique of size `k` grown from `start`.
///
/// Repeatedly adds the node with the largest marginal weight, ties going to
/// the smallest id. The score is the total weight of the `j`-sets inside the
/// clique. Before the clique holds `j - 1` nodes no marginal is defined, so
/// nodes are ranked by the total weight of the `j`-sets they would complete.
pub fn greedy_max_weight_clique(w: &JsetWeights, k: usize, start: usize) -> Result<(KSet, f64)> {
    if k == 0 || k > w.n || start >= w.n {
        return Err(Error::Precondition(format!("need 1 <= k <= n and start < n, got k={k}, start={start}")));
    }
    let (members, score) = greedy_prefixes(w, k, start).pop().expect("at least the start node");
    Ok((KSet::new(members)?, score))
}

/// How candidate columns are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pricing {
    /// Greedy growth from every start node on `+g` and `-g`.
    #[default]
    Greedy,
    /// Every clique of every size; for audits on small instances.
    Exhaustive,
}

/// Outcome of one pricing call.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingOutcome {
    /// Violated columns with `|<A_tau, g>|`, the preferred one first.
    pub columns: Vec<(KSet, f64)>,
    /// Largest `|<A_tau, g>|` among the evaluated columns outside the working set.
    pub max_correlation: f64,
}

impl PricingOutcome {
    /// The preferred violated column.
    pub fn column(&self) -> Option<&(KSet, f64)> {
        self.columns.first()
    }
}

/// Nodes lying in at least one `j`-set of positive weight, for `+g` and `-g`.
fn live_starts(n: usize, j: usize, gamma: &[f64]) -> [Vec<bool>; 2] {
    let mut live = [vec![false; n], vec![false; n]];
    for (set, &g) in KSubsets::new(n, j).zip(gamma) {
        if g != 0.0 {
            let side = usize::from(g < 0.0);
            for &v in set.as_slice() {
                live[side][v] = true;
            }
        }
    }
    live
}

#[derive(Default)]
struct SizeBest {
    all: Vec<(f64, KSet)>,
}

fn better(a: &(f64, KSet), b: &(f64, KSet)) -> std::cmp::Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.colex_cmp(&b.1))
}

/// Searches sizes `j+1..=kmax` in order; the preferred column is the best
/// one outside `exclude` of the first size with correlation above
/// `1 + viol_tol`. Up to `max_columns - 1` further violated columns follow,
/// strongest first.
///
/// Greedy growth skips start nodes outside every positive-weight `j`-set.
#[allow(clippy::too_many_arguments)]
pub fn price(
    n: usize,
    j: usize,
    kmax: usize,
    gamma: &[f64],
    mode: Pricing,
    exclude: &HashSet<KSet>,
    viol_tol: f64,
    cap: u64,
    max_columns: usize,
) -> Result<PricingOutcome> {
    let w = JsetWeights::new(n, j, gamma)?;
    let kmax = kmax.min(n);
    let mut per_size: Vec<SizeBest> = (0..=kmax).map(|_| SizeBest::default()).collect();
    match mode {
        Pricing::Greedy => {
            let neg = w.negated();
            let live = live_starts(n, j, gamma);
            for (view, live) in [&w, &neg].into_iter().zip(&live) {
                for start in (0..n).filter(|&s| live[s]) {
                    for (members, score) in greedy_prefixes(view, kmax, start).into_iter().skip(j) {
                        let size = members.len();
                        let set = KSet::new(members)?;
                        per_size[size].all.push((score * column_scale(size, j), set));
                    }
                }
            }
        }
        Pricing::Exhaustive => {
            let mut total: u128 = 0;
            for k in j + 1..=kmax {
                total += u128::from(binom(n as u64, k as u64)?);
            }
            if total > u128::from(cap) {
                return Err(Error::EnumerationCap { count: total, cap });
            }
            for k in j + 1..=kmax {
                let mut best: Option<(f64, KSet)> = None;
                for tau in KSubsets::new(n, k) {
                    if exclude.contains(&tau) {
                        continue;
                    }
                    let c = column_dot(&tau, j, gamma).abs();
                    if best.as_ref().is_none_or(|b| c > b.0) {
                        best = Some((c, tau));
                    }
                }
                per_size[k].all.extend(best);
            }
        }
    }
    let mut max_correlation = 0.0f64;
    let mut columns: Vec<(KSet, f64)> = Vec::new();
    for sb in per_size.iter_mut().skip(j + 1) {
        sb.all.sort_by(better);
        let Some((c, tau)) = sb.all.iter().find(|(_, t)| !exclude.contains(t)) else { continue };
        max_correlation = max_correlation.max(*c);
        if columns.is_empty() && *c > 1.0 + viol_tol {
            columns.push((tau.clone(), *c));
        }
    }
    if max_columns > 1 && !columns.is_empty() {
        let mut rest: Vec<(f64, KSet)> = per_size
            .into_iter()
            .flat_map(|sb| sb.all)
            .filter(|(c, t)| *c > 1.0 + viol_tol && !exclude.contains(t) && *t != columns[0].0)
            .collect();
        rest.sort_by(better);
        rest.dedup_by(|a, b| a.1 == b.1);
        columns.extend(rest.into_iter().take(max_columns - 1).map(|(c, t)| (t, c)));
    }
    Ok(PricingOutcome { columns, max_correlation })
}

/// Greedy pricing over `j+1..=kmax` with the default tolerance.
pub fn find_violated_column(n: usize, j: usize, kmax: usize, gamma: &[f64]) -> Result<Option<(KSet, f64)>> {
    Ok(price(n, j, kmax, gamma, Pricing::Greedy, &HashSet::new(), VIOL_TOL, u64::MAX, 1)?.columns.into_iter().next())
}

/// `max |<A_tau, g>|` over every clique of size `j..=kmax`, by enumeration.
pub fn exhaustive_max_correlation(n: usize, j: usize, kmax: usize, gamma: &[f64], cap: u64) -> Result<f64> {
    let mut total: u128 = 0;
    for k in j..=kmax.min(n) {
        total += u128::from(binom(n as u64, k as u64)?);
    }
    if total > u128::from(cap) {
        return Err(Error::EnumerationCap { count: total, cap });
    }
    let mut best = 0.0f64;
    for k in j..=kmax.min(n) {
        for tau in KSubsets::new(n, k) {
            best = best.max(column_dot(&tau, j, gamma).abs());
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radon::CliqueDictionary;

    fn pairs(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        KSubsets::new(n, 2).map(|s| f(s.as_slice()[0], s.as_slice()[1])).collect()
    }

    /// Best clique of size `k` by enumeration.
    fn brute(n: usize, j: usize, k: usize, g: &[f64]) -> f64 {
        KSubsets::new(n, k)
            .map(|t| {
                let mut s = 0.0;
                t.for_each_subset_rank(j, |r| s += g[r]);
                s
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn equal_weights_take_lowest_ids() {
        let g = vec![0.5; 28];
        let w = JsetWeights::new(8, 2, &g).unwrap();
        let (c, s) = greedy_max_weight_clique(&w, 4, 5).unwrap();
        assert_eq!(c.as_slice(), &[0, 1, 2, 5]);
        assert_eq!(s, 6.0 * 0.5);
    }

    #[test]
    fn planted_clique_found() {
        let team = KSet::range(3, 5);
        let g = pairs(12, |u, v| if team.contains(u) && team.contains(v) { 1.0 } else { 0.0 });
        let w = JsetWeights::new(12, 2, &g).unwrap();
        let (c, s) = greedy_max_weight_clique(&w, 5, 4).unwrap();
        assert_eq!(c, team);
        assert_eq!(s, 10.0);
        assert_eq!(brute(12, 2, 5, &g), 10.0);
    }

    #[test]
    fn greedy_can_be_suboptimal() {
        // a heavy bait edge from the start node leads away from the best triangle
        let mut g = pairs(6, |_, _| 0.0);
        let idx = |u: usize, v: usize| v * (v - 1) / 2 + u;
        g[idx(0, 1)] = 3.0;
        g[idx(0, 2)] = 2.0;
        g[idx(0, 3)] = 2.0;
        g[idx(2, 3)] = 2.0;
        g[idx(1, 2)] = -5.0;
        g[idx(1, 3)] = -5.0;
        let w = JsetWeights::new(6, 2, &g).unwrap();
        let (_, s) = greedy_max_weight_clique(&w, 3, 0).unwrap();
        let opt = brute(6, 2, 3, &g);
        assert_eq!(opt, 6.0);
        assert!(s < opt);
        assert!(s >= 0.5 * opt, "greedy {s} vs optimum {opt}");
    }

    #[test]
    fn higher_order_weights() {
        // j = 3: all triples inside {1,3,4,6} weigh 1
        let team = KSet::new(vec![1, 3, 4, 6]).unwrap();
        let g: Vec<f64> =
            KSubsets::new(8, 3).map(|t| if t.is_subset_of(&team) { 1.0 } else { 0.0 }).collect();
        let w = JsetWeights::new(8, 3, &g).unwrap();
        let (c, s) = greedy_max_weight_clique(&w, 4, 3).unwrap();
        assert_eq!(c, team);
        assert_eq!(s, 4.0);
        assert_eq!(w.weight(&[6, 1, 4]), 1.0);
    }

    #[test]
    fn pricing_returns_heavy_team() {
        let dict = CliqueDictionary::enumerate_full(10, 2, 5).unwrap();
        let team = KSet::range(5, 5);
        // mass per pair 0.4 gives <A_team, g> = 10 * 0.4 / sqrt(10) > 1
        let g = pairs(10, |u, v| if team.contains(u) && team.contains(v) { -0.4 } else { 0.0 });
        let (c, viol) = find_violated_column(10, 2, 5, &g).unwrap().unwrap();
        assert_eq!(c, team);
        let corr = dict.apply_adjoint(&g).unwrap();
        let exact = corr[dict.position(&team).unwrap()].abs();
        assert!((viol - exact).abs() < 1e-10);
        assert!((viol - corr.iter().fold(0.0f64, |a, x| a.max(x.abs()))).abs() < 1e-12);

        assert!(find_violated_column(10, 2, 5, &vec![0.0; 45]).unwrap().is_none());
        let mut ex = HashSet::new();
        ex.insert(team.clone());
        let out = price(10, 2, 5, &g, Pricing::Exhaustive, &ex, VIOL_TOL, 1 << 20, 1).unwrap();
        // subsets of the team at size 4 and 3: 6*0.4/sqrt(6) ~ 0.98, 3*0.4/sqrt(3) ~ 0.69
        assert!(out.column().is_none());
        assert!((out.max_correlation - 2.4 / 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_audit_matches_adjoint() {
        let g: Vec<f64> = (0..21).map(|i| ((i * 7) % 5) as f64 / 10.0 - 0.2).collect();
        let dict = CliqueDictionary::enumerate_full_sizes(7, 2, 2..=4, 1 << 20).unwrap();
        let corr = dict.apply_adjoint(&g).unwrap();
        let want = corr.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        assert!((exhaustive_max_correlation(7, 2, 4, &g, 1 << 20).unwrap() - want).abs() < 1e-12);
    }
}
