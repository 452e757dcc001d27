//! Orbit statistics of M acting on (Z/nZ)^d: fixed-point counts a_m, orbit
//! counts c_m by Möbius inversion, the cycle polynomial
//! Z_n(t) = prod_m (1 - t^m)^{c_m}, and a full functional-graph enumeration
//! that serves as the independent oracle for everything else.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith;
use crate::error::{Error, Result};
use crate::pretail;
use crate::ring::{kernel_size, LatticeSpec, ResidueMatrix};

// ---------------------------------------------------------------------------
// Factored cycle polynomials
// ---------------------------------------------------------------------------

/// A product prod_i (1 - t^{m_i})^{e_i}, kept factored. Factors are ordered
/// by m_i; repeated m_i are allowed (the cat-map closed forms are emitted in
/// their structured per-shell shape), and `merged` canonicalises.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredPoly {
    factors: Vec<(u128, BigUint)>,
}

impl FactoredPoly {
    pub fn new(mut factors: Vec<(u128, BigUint)>) -> Self {
        factors.retain(|(_, e)| !e.is_zero());
        factors.sort_by_key(|&(m, _)| m);
        FactoredPoly { factors }
    }

    pub fn one() -> Self {
        FactoredPoly { factors: Vec::new() }
    }

    pub fn factors(&self) -> &[(u128, BigUint)] {
        &self.factors
    }

    /// Canonical form: one factor per exponent m.
    pub fn merged(&self) -> FactoredPoly {
        let mut map: BTreeMap<u128, BigUint> = BTreeMap::new();
        for (m, e) in &self.factors {
            *map.entry(*m).or_insert_with(BigUint::zero) += e;
        }
        FactoredPoly { factors: map.into_iter().collect() }
    }

    /// Degree of the expanded polynomial, sum of m_i e_i.
    pub fn degree(&self) -> BigUint {
        self.factors
            .iter()
            .map(|(m, e)| BigUint::from(*m) * e)
            .sum()
    }

    /// Coefficient vector of the expanded product (ascending powers of t).
    /// Refuses degrees beyond 10^6.
    pub fn expand(&self) -> Result<Vec<BigInt>> {
        let deg = self
            .degree()
            .to_usize()
            .filter(|&d| d <= 1_000_000)
            .ok_or(Error::Overflow("polynomial expansion degree"))?;
        let mut coeff = vec![BigInt::zero(); deg + 1];
        coeff[0] = BigInt::one();
        let mut cur = 0usize;
        for (m, e) in &self.factors {
            let m = *m as usize;
            let e = e.to_usize().expect("bounded by degree");
            for _ in 0..e {
                // multiply by (1 - t^m)
                for i in (0..=cur).rev() {
                    let v = coeff[i].clone();
                    if !v.is_zero() {
                        coeff[i + m] -= v;
                    }
                }
                cur += m;
            }
        }
        Ok(coeff)
    }

    /// The bit-exact text format: `(1-t)(1-t^2)^2(1-t^10)^2`, factors sorted
    /// by m, exponent 1 omitted.
    pub fn render(&self) -> String {
        if self.factors.is_empty() {
            return "1".into();
        }
        let mut out = String::new();
        for (m, e) in &self.factors {
            if *m == 1 {
                out.push_str("(1-t)");
            } else {
                out.push_str(&format!("(1-t^{m})"));
            }
            if !e.is_one() {
                out.push_str(&format!("^{e}"));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<FactoredPoly> {
        let mut factors = Vec::new();
        let bytes = text.trim();
        if bytes == "1" {
            return Ok(FactoredPoly::one());
        }
        let mut rest = bytes;
        while !rest.is_empty() {
            let close = rest.find(')').ok_or_else(|| Error::Parse {
                pos: bytes.len() - rest.len(),
                msg: "expected ')'".into(),
            })?;
            let inner = &rest[..close];
            let m: u128 = if inner == "(1-t" {
                1
            } else {
                inner
                    .strip_prefix("(1-t^")
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse {
                        pos: bytes.len() - rest.len(),
                        msg: format!("bad factor {inner:?}"),
                    })?
            };
            rest = &rest[close + 1..];
            let e = if let Some(r) = rest.strip_prefix('^') {
                let end = r.find('(').unwrap_or(r.len());
                let e: BigUint = r[..end].parse().map_err(|_| Error::Parse {
                    pos: bytes.len() - rest.len(),
                    msg: format!("bad exponent {:?}", &r[..end]),
                })?;
                rest = &r[end..];
                e
            } else {
                BigUint::one()
            };
            factors.push((m, e));
        }
        Ok(FactoredPoly::new(factors))
    }
}

impl std::fmt::Display for FactoredPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render())
    }
}

// ---------------------------------------------------------------------------
// Censuses
// ---------------------------------------------------------------------------

/// The multiset of cycles of (M, n): pairs (length m, count c_m) sorted by m,
/// plus the number of eventually-periodic (pretail) points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitCensus {
    spec: LatticeSpec,
    cycles: Vec<(u128, BigUint)>,
    eventually_periodic: BigUint,
}

impl OrbitCensus {
    pub fn new(
        spec: LatticeSpec,
        cycles: Vec<(u128, BigUint)>,
        eventually_periodic: BigUint,
    ) -> Result<Self> {
        let census = OrbitCensus { spec, cycles, eventually_periodic };
        if census.total_points() != spec.points() {
            return Err(Error::Internal(format!(
                "census mass {} does not cover the lattice ({} points)",
                census.total_points(),
                spec.points()
            )));
        }
        if census.count_of(1).is_zero() {
            return Err(Error::Internal("0 is a fixed point of every matrix".into()));
        }
        Ok(census)
    }

    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    /// Sorted (length, count) pairs, counts > 0.
    pub fn cycles(&self) -> &[(u128, BigUint)] {
        &self.cycles
    }

    pub fn count_of(&self, m: u128) -> BigUint {
        self.cycles
            .iter()
            .find(|&&(len, _)| len == m)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigUint::zero)
    }

    pub fn eventually_periodic(&self) -> &BigUint {
        &self.eventually_periodic
    }

    pub fn periodic_points(&self) -> BigUint {
        self.cycles
            .iter()
            .map(|(m, c)| BigUint::from(*m) * c)
            .sum()
    }

    pub fn total_points(&self) -> BigUint {
        self.periodic_points() + &self.eventually_periodic
    }

    /// Rebuilds a_m = sum_{l | m} l c_l from the census (Möbius roundtrip).
    pub fn fixed_points_of_power(&self, m: u128) -> BigUint {
        self.cycles
            .iter()
            .filter(|&&(l, _)| m.is_multiple_of(l))
            .map(|(l, c)| BigUint::from(*l) * c)
            .sum()
    }

    /// lcm of all cycle lengths.
    pub fn cycle_lcm(&self) -> Result<u128> {
        let mut k = 1u128;
        for &(m, _) in &self.cycles {
            k = arith::lcm_u128(k, m)?;
        }
        Ok(k)
    }
}

/// The cycle polynomial Z_n(t) = prod (1 - t^m)^{c_m} of a census, factored.
pub fn zeta_polynomial(census: &OrbitCensus) -> FactoredPoly {
    FactoredPoly::new(census.cycles.to_vec())
}

/// a_m = |ker(M^m - 1)|: the number of points fixed by M^m, i.e. periodic
/// points whose cycle length divides m.
pub fn fixed_point_count(m: &ResidueMatrix, e: u128) -> BigUint {
    assert!(e >= 1, "fixed_point_count needs m >= 1");
    let pw = m.pow(e);
    let diff = pw.sub(&ResidueMatrix::identity(m.spec())).expect("same spec");
    kernel_size(&diff)
}

/// The full orbit census of (M, n), computed without point enumeration:
/// the lcm k of all cycle lengths comes from the order of the invertible
/// block per prime power, a_m = |ker(M^m - 1)| for each divisor m of k, and
/// c_m by Möbius inversion. Falls back to enumeration (within the default
/// cap) only if an order scan refuses.
pub fn orbit_counts(m: &ResidueMatrix) -> Result<OrbitCensus> {
    let spec = m.spec();
    let factored_k = match pretail::invertible_part_factored_order(m) {
        Ok(f) => f,
        Err(Error::SearchCap { .. }) => {
            return Ok(enumerate_functional_graph(m, crate::DEFAULT_MAX_POINTS)?
                .census()
                .clone())
        }
        Err(e) => return Err(e),
    };

    let primes: Vec<(u64, u32)> = factored_k.into_iter().collect();
    let mut divisors: Vec<(u128, Vec<u32>)> = vec![(1, vec![0; primes.len()])];
    for (idx, &(p, e)) in primes.iter().enumerate() {
        let snapshot = divisors.clone();
        let mut pw: u128 = 1;
        for j in 1..=e {
            pw = pw.checked_mul(p as u128).ok_or(Error::Overflow("divisor"))?;
            for (val, exps) in &snapshot {
                let nv = val.checked_mul(pw).ok_or(Error::Overflow("divisor"))?;
                let mut ne = exps.clone();
                ne[idx] = j;
                divisors.push((nv, ne));
            }
        }
    }
    divisors.sort_by_key(|&(v, _)| v);

    let mut fixed: BTreeMap<u128, BigInt> = BTreeMap::new();
    for &(v, _) in &divisors {
        fixed.insert(v, BigInt::from(fixed_point_count(m, v)));
    }

    let mut cycles = Vec::new();
    for (mi, me) in &divisors {
        // c_m = (1/m) sum_{e | m} mu(m/e) a_e over the divisor lattice.
        let mut acc = BigInt::zero();
        for (ei, ee) in &divisors {
            if ee.iter().zip(me).all(|(a, b)| a <= b) {
                let mut mu = 1i64;
                let mut ok = true;
                for (a, b) in ee.iter().zip(me) {
                    match b - a {
                        0 => {}
                        1 => mu = -mu,
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    acc += BigInt::from(mu) * &fixed[ei];
                }
            }
        }
        let (q, r) = acc.div_rem(&BigInt::from(*mi));
        if !r.is_zero() || q.is_negative() {
            return Err(Error::Internal(format!(
                "Möbius inversion produced a non-integral or negative count at m = {mi}"
            )));
        }
        if !q.is_zero() {
            cycles.push((*mi, q.magnitude().clone()));
        }
    }

    let k = divisors.last().expect("at least divisor 1").0;
    let periodic = fixed[&k].magnitude().clone();
    let ev = spec.points() - periodic;
    OrbitCensus::new(spec, cycles, ev)
}

// ---------------------------------------------------------------------------
// Exhaustive functional-graph oracle
// ---------------------------------------------------------------------------

#[inline]
pub(crate) fn encode_point(coords: &[u64], n: u64) -> u64 {
    coords.iter().rev().fold(0u64, |acc, &c| acc * n + c)
}

pub(crate) fn decode_point(mut code: u64, n: u64, d: usize) -> Vec<u64> {
    let mut out = vec![0u64; d];
    for slot in out.iter_mut() {
        *slot = code % n;
        code /= n;
    }
    out
}

/// The complete directed graph x -> Mx on (Z/nZ)^d, with every point walked:
/// cycle structure, predecessor lists, pretail depths and the census. This
/// is the brute-force oracle; it refuses lattices above the cap.
pub struct FunctionalGraph {
    spec: LatticeSpec,
    succ: Vec<u32>,
    on_cycle: Vec<bool>,
    depth: Vec<u32>,
    pred_offsets: Vec<u32>,
    pred_items: Vec<u32>,
    census: OrbitCensus,
    max_pretail: u32,
    cycle_lcm: u128,
}

pub fn enumerate_functional_graph(
    m: &ResidueMatrix,
    max_points: u64,
) -> Result<FunctionalGraph> {
    let spec = m.spec();
    let total_big = spec.points();
    let total = match total_big.to_u64() {
        Some(t) if t <= max_points => t as usize,
        _ => {
            return Err(Error::EnumerationCap { required: total_big, cap: max_points })
        }
    };
    let (d, n) = (spec.d(), spec.n());

    let mut succ = vec![0u32; total];
    for (code, slot) in succ.iter_mut().enumerate() {
        let x = decode_point(code as u64, n, d);
        let y = m.apply(&x);
        *slot = encode_point(&y, n) as u32;
    }

    // Cycle detection: walk unvisited paths; a path that meets itself while
    // active closes a new cycle.
    let mut state = vec![0u8; total]; // 0 new, 1 active, 2 done
    let mut on_cycle = vec![false; total];
    let mut cycle_counts: BTreeMap<u128, u64> = BTreeMap::new();
    let mut cyclic_points = 0u64;
    let mut path = Vec::new();
    for start in 0..total {
        if state[start] != 0 {
            continue;
        }
        path.clear();
        let mut x = start;
        while state[x] == 0 {
            state[x] = 1;
            path.push(x);
            x = succ[x] as usize;
        }
        if state[x] == 1 {
            // new cycle through x
            let mut len = 1u128;
            let mut y = succ[x] as usize;
            on_cycle[x] = true;
            while y != x {
                on_cycle[y] = true;
                len += 1;
                y = succ[y] as usize;
            }
            *cycle_counts.entry(len).or_insert(0) += 1;
            cyclic_points += len as u64;
        }
        for &v in &path {
            state[v] = 2;
        }
    }

    // Predecessor lists (counting sort by successor).
    let mut pred_offsets = vec![0u32; total + 1];
    for &s in &succ {
        pred_offsets[s as usize + 1] += 1;
    }
    for i in 0..total {
        pred_offsets[i + 1] += pred_offsets[i];
    }
    let mut cursor = pred_offsets.clone();
    let mut pred_items = vec![0u32; total];
    for (v, &s) in succ.iter().enumerate() {
        pred_items[cursor[s as usize] as usize] = v as u32;
        cursor[s as usize] += 1;
    }

    // Pretail depths: multi-source BFS from the cycles along predecessors.
    let mut depth = vec![0u32; total];
    let mut queue: std::collections::VecDeque<u32> = (0..total as u32)
        .filter(|&v| on_cycle[v as usize])
        .collect();
    let mut max_pretail = 0u32;
    while let Some(v) = queue.pop_front() {
        let (lo, hi) = (pred_offsets[v as usize], pred_offsets[v as usize + 1]);
        for &u in &pred_items[lo as usize..hi as usize] {
            if on_cycle[u as usize] {
                continue;
            }
            depth[u as usize] = depth[v as usize] + 1;
            max_pretail = max_pretail.max(depth[u as usize]);
            queue.push_back(u);
        }
    }

    let mut cycle_lcm = 1u128;
    for &len in cycle_counts.keys() {
        cycle_lcm = arith::lcm_u128(cycle_lcm, len)?;
    }

    let census = OrbitCensus::new(
        spec,
        cycle_counts
            .iter()
            .map(|(&m, &c)| (m, BigUint::from(c)))
            .collect(),
        BigUint::from(total as u64 - cyclic_points),
    )?;

    Ok(FunctionalGraph {
        spec,
        succ,
        on_cycle,
        depth,
        pred_offsets,
        pred_items,
        census,
        max_pretail,
        cycle_lcm,
    })
}

impl FunctionalGraph {
    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    pub fn census(&self) -> &OrbitCensus {
        &self.census
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn successor(&self, v: u32) -> u32 {
        self.succ[v as usize]
    }

    pub fn predecessors(&self, v: u32) -> &[u32] {
        let (lo, hi) = (self.pred_offsets[v as usize], self.pred_offsets[v as usize + 1]);
        &self.pred_items[lo as usize..hi as usize]
    }

    pub fn is_periodic(&self, v: u32) -> bool {
        self.on_cycle[v as usize]
    }

    /// Pretail length of a point (0 for periodic points).
    pub fn pretail_length(&self, v: u32) -> u32 {
        self.depth[v as usize]
    }

    pub fn point(&self, v: u32) -> Vec<u64> {
        decode_point(v as u64, self.spec.n(), self.spec.d())
    }

    pub fn index_of(&self, coords: &[u64]) -> u32 {
        encode_point(coords, self.spec.n()) as u32
    }

    pub fn pretail_point_count(&self) -> u64 {
        self.census.eventually_periodic().to_u64().expect("capped")
    }

    /// The minimal pair (m, k) with M^{k+m} = M^m: k the lcm of all cycle
    /// lengths, m the maximum pretail length.
    pub fn minimal_exponents(&self) -> (u32, u128) {
        (self.max_pretail, self.cycle_lcm)
    }

    /// Children of `v` in the in-tree sense: predecessors that are pretail
    /// points. For a periodic root this drops exactly the periodic
    /// predecessor on its cycle.
    pub fn tree_children(&self, v: u32) -> Vec<u32> {
        self.predecessors(v)
            .iter()
            .copied()
            .filter(|&u| !self.on_cycle[u as usize])
            .collect()
    }

    /// Canonical (AHU) code of the pretail tree hanging off a point.
    pub fn tree_code_at(&self, root: u32) -> String {
        pretail::ahu_code(root as usize, &|v| {
            self.tree_children(v as u32).into_iter().map(|u| u as usize).collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::IntMatrix;

    fn rm(text: &str, n: u64) -> ResidueMatrix {
        IntMatrix::parse(text).unwrap().reduce(n).unwrap()
    }

    #[test]
    fn factored_poly_format() {
        let p = FactoredPoly::new(vec![
            (10, BigUint::from(2u32)),
            (1, BigUint::one()),
            (2, BigUint::from(2u32)),
        ]);
        assert_eq!(p.render(), "(1-t)(1-t^2)^2(1-t^10)^2");
        let q = FactoredPoly::parse("(1-t)(1-t^2)^2(1-t^10)^2").unwrap();
        assert_eq!(p, q);
        assert_eq!(FactoredPoly::one().render(), "1");
        assert_eq!(p.degree(), BigUint::from(25u32));
    }

    #[test]
    fn expand_small_product() {
        // (1-t)(1-t^2) = 1 - t - t^2 + t^3
        let p = FactoredPoly::new(vec![(1, BigUint::one()), (2, BigUint::one())]);
        let c = p.expand().unwrap();
        let want: Vec<BigInt> = [1, -1, -1, 1].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(c, want);
        // structured vs merged expansion agree
        let a = FactoredPoly::new(vec![
            (3, BigUint::one()),
            (1, BigUint::one()),
            (3, BigUint::from(4u32)),
        ]);
        assert_eq!(a.expand().unwrap(), a.merged().expand().unwrap());
    }

    #[test]
    fn fixed_point_counts_arnold_mod5() {
        let m = rm("2,1;1,1", 5);
        assert_eq!(fixed_point_count(&m, 1), BigUint::one());
        assert_eq!(fixed_point_count(&m, 2), BigUint::from(5u32));
        let id = ResidueMatrix::identity(LatticeSpec::new(2, 7).unwrap());
        assert_eq!(fixed_point_count(&id, 1), BigUint::from(49u32));
    }

    #[test]
    fn census_worked_examples() {
        // Arnold mod 5: {(1,1),(2,2),(10,2)}
        let c = orbit_counts(&rm("2,1;1,1", 5)).unwrap();
        assert_eq!(
            c.cycles(),
            &[
                (1, BigUint::one()),
                (2, BigUint::from(2u32)),
                (10, BigUint::from(2u32))
            ]
        );
        assert!(c.eventually_periodic().is_zero());

        // [[0,12],[1,6]] mod 15: {(1,1),(2,2),(4,5)}, 200 pretail points
        let c = orbit_counts(&rm("0,12;1,6", 15)).unwrap();
        assert_eq!(
            c.cycles(),
            &[
                (1, BigUint::one()),
                (2, BigUint::from(2u32)),
                (4, BigUint::from(5u32))
            ]
        );
        assert_eq!(c.eventually_periodic(), &BigUint::from(200u32));

        // [[4,0],[1,4]] mod 6: {(1,3),(3,2)}
        let c = orbit_counts(&rm("4,0;1,4", 6)).unwrap();
        assert_eq!(
            c.cycles(),
            &[(1, BigUint::from(3u32)), (3, BigUint::from(2u32))]
        );
        assert_eq!(c.eventually_periodic(), &BigUint::from(27u32));
    }

    #[test]
    fn census_n_equals_one() {
        let c = orbit_counts(&rm("2,1;1,1", 1)).unwrap();
        assert_eq!(c.cycles(), &[(1, BigUint::one())]);
        assert!(c.eventually_periodic().is_zero());
    }

    #[test]
    fn enumeration_matches_census() {
        for (text, n) in [
            ("2,1;1,1", 5u64),
            ("0,12;1,6", 15),
            ("4,0;1,4", 6),
            ("4,4;1,4", 8),
            ("1,1;1,0", 12),
            ("2,0;0,2", 9),
        ] {
            let m = rm(text, n);
            let fast = orbit_counts(&m).unwrap();
            let graph = enumerate_functional_graph(&m, 1 << 20).unwrap();
            assert_eq!(&fast, graph.census(), "{text} mod {n}");
        }
    }

    #[test]
    fn big_tree_graph_shape() {
        let g = enumerate_functional_graph(&rm("4,4;1,4", 8), 1 << 20).unwrap();
        assert_eq!(g.census().cycles(), &[(1, BigUint::one())]);
        assert_eq!(g.pretail_point_count(), 63);
        assert_eq!(g.minimal_exponents(), (4, 1));
    }

    #[test]
    fn invertible_graph_has_no_pretail() {
        let g = enumerate_functional_graph(&rm("2,1;1,1", 7), 1 << 20).unwrap();
        assert_eq!(g.pretail_point_count(), 0);
        assert_eq!(g.minimal_exponents().0, 0);
    }

    #[test]
    fn minimal_exponents_satisfy_matrix_congruence() {
        for (text, n) in [("4,0;1,4", 6u64), ("4,4;1,4", 8), ("0,12;1,6", 15)] {
            let m = rm(text, n);
            let g = enumerate_functional_graph(&m, 1 << 20).unwrap();
            let (mm, k) = g.minimal_exponents();
            let base = m.pow(mm as u128);
            assert_eq!(base.mul(&m.pow(k)).unwrap(), base, "M^(k+m) = M^m");
            // minimality of m
            if mm > 0 {
                let prev = m.pow(mm as u128 - 1);
                assert_ne!(prev.mul(&m.pow(k)).unwrap(), prev);
            }
        }
    }

    #[test]
    fn cap_refusal_reports_requirement() {
        let m = rm("2,1;1,1", 101);
        match enumerate_functional_graph(&m, 10_000) {
            Err(Error::EnumerationCap { required, cap }) => {
                assert_eq!(required, BigUint::from(10201u32));
                assert_eq!(cap, 10_000);
            }
            Err(other) => panic!("expected cap refusal, got {other:?}"),
            Ok(_) => panic!("expected cap refusal, got a graph"),
        }
    }

    #[test]
    fn moebius_roundtrip_on_census() {
        let m = rm("1,1;1,0", 10);
        let c = orbit_counts(&m).unwrap();
        for e in [1u128, 2, 3, 4, 6, 12, 60] {
            assert_eq!(c.fixed_points_of_power(e), fixed_point_count(&m, e));
        }
    }
}
