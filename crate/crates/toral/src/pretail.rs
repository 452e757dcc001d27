//! Pretail structure of non-invertible actions: kernel chains, the
//! periodic/nilpotent splitting of the lattice, the rooted pretail tree at 0
//! with its level profiles, block diagonalisation over Z/p^rZ, minimal
//! polynomials over F_p and nilpotent Jordan profiles.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::arith;
use crate::error::{Error, Result};
use crate::order;
use crate::ring::{
    bigint_mod_u64, kernel_size, smith_decompose, IntMatrix, LatticeSpec, ResidueMatrix,
    SolutionModule,
};

/// |ker(M^j)| for j = 0..=m_stable; the chain is strictly increasing and
/// m_stable (the first index where it stops growing) equals the maximal
/// pretail length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelChain {
    pub sizes: Vec<BigUint>,
    pub m_stable: u32,
}

pub fn kernel_chain(m: &ResidueMatrix) -> KernelChain {
    let mut sizes = vec![BigUint::one()];
    let mut power = ResidueMatrix::identity(m.spec());
    loop {
        power = power.mul(m).expect("same spec");
        let next = kernel_size(&power);
        if next == *sizes.last().expect("nonempty") {
            break;
        }
        sizes.push(next);
    }
    let m_stable = (sizes.len() - 1) as u32;
    KernelChain { sizes, m_stable }
}

/// Direct-sum decomposition of the lattice into periodic points and the
/// stable kernel: L = Mper(M) + ker(M^m), with Mper = im(M^m) and k the lcm
/// of the cycle lengths on Mper.
#[derive(Debug, Clone)]
pub struct PeriodicDecomposition {
    pub m: u32,
    pub k: u128,
    pub mper_size: BigUint,
    pub kernel_size: BigUint,
    /// Explicit point sets, present when within the enumeration cap.
    pub mper_points: Option<Vec<Vec<u64>>>,
    pub kernel_points: Option<Vec<Vec<u64>>>,
}

pub fn periodic_decomposition(
    m: &ResidueMatrix,
    max_points: u64,
) -> Result<PeriodicDecomposition> {
    let spec = m.spec();
    let chain = kernel_chain(m);
    let ker_sz = chain.sizes.last().expect("nonempty").clone();
    let points = spec.points();
    if (&points % &ker_sz) != BigUint::zero() {
        return Err(Error::Internal("kernel size must divide n^d".into()));
    }
    let mper_sz = &points / &ker_sz;

    let mut k: u128 = 1;
    for (p, e) in invertible_part_factored_order(m)? {
        for _ in 0..e {
            k = k.checked_mul(p as u128).ok_or(Error::Overflow("cycle lcm"))?;
        }
    }

    let stable = m.pow(chain.m_stable as u128);
    let kernel_points = if ker_sz.to_u64().map(|s| s <= max_points).unwrap_or(false) {
        let module = SolutionModule::kernel(&stable.lift(), spec.d(), spec.n());
        let mut pts: Vec<Vec<u64>> = module.iter().collect();
        pts.sort();
        Some(pts)
    } else {
        None
    };
    let mper_points = if mper_sz.to_u64().map(|s| s <= max_points).unwrap_or(false) {
        let mut pts = enumerate_image(&stable);
        pts.sort();
        if BigUint::from(pts.len() as u64) != mper_sz {
            return Err(Error::Internal("image enumeration does not match |Mper|".into()));
        }
        Some(pts)
    } else {
        None
    };
    if let (Some(ker), Some(per)) = (&kernel_points, &mper_points) {
        let ker_set: std::collections::HashSet<&Vec<u64>> = ker.iter().collect();
        let meet: Vec<_> = per.iter().filter(|p| ker_set.contains(p)).collect();
        if meet.len() != 1 || meet[0].iter().any(|&c| c != 0) {
            return Err(Error::Internal("Mper and the stable kernel must meet only in 0".into()));
        }
    }

    Ok(PeriodicDecomposition {
        m: chain.m_stable,
        k,
        mper_size: mper_sz,
        kernel_size: ker_sz,
        mper_points,
        kernel_points,
    })
}

/// Points of im(S) on (Z/nZ)^d, via the Smith decomposition of S.
fn enumerate_image(s: &ResidueMatrix) -> Vec<Vec<u64>> {
    let (d, n) = (s.d(), s.n());
    let dec = smith_decompose(&s.lift(), d);
    let nn = BigInt::from(n);
    // Generators s_i * (column i of L^{-1}), each of order n / gcd(s_i, n).
    let mut gens: Vec<(Vec<u64>, u64)> = Vec::new();
    for i in 0..d {
        let g = num_integer::Integer::gcd(&dec.diag[i], &nn)
            .to_u64()
            .expect("divides n");
        let ord = n / g;
        if ord <= 1 {
            continue;
        }
        let col: Vec<u64> = (0..d)
            .map(|row| bigint_mod_u64(&(&dec.lhs_inv[row][i] * &dec.diag[i]), n))
            .collect();
        gens.push((col, ord));
    }
    let mut out = vec![vec![0u64; d]];
    for (gen, ord) in gens {
        let prev = std::mem::take(&mut out);
        let mut shift = vec![0u64; d];
        for _ in 0..ord {
            for p in &prev {
                out.push(
                    p.iter()
                        .zip(&shift)
                        .map(|(&a, &b)| arith::add_mod(a, b, n))
                        .collect(),
                );
            }
            for (sl, g) in shift.iter_mut().zip(&gen) {
                *sl = arith::add_mod(*sl, *g, n);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// The pretail tree at 0
// ---------------------------------------------------------------------------

/// The rooted in-tree of all pretails of the fixed point 0. Node 0 is the
/// root; the parent of x is Mx. `v[i]` counts nodes at depth i, `w[i]` the
/// non-leaves at depth i (with w_0 = 1 for any nontrivial tree).
#[derive(Debug, Clone)]
pub struct PretailTree {
    points: Vec<Vec<u64>>,
    parent: Vec<Option<usize>>,
    depth: Vec<u32>,
    children: Vec<Vec<usize>>,
    pub v: Vec<u64>,
    pub w: Vec<u64>,
    pub height: u32,
}

pub fn pretail_tree(m: &ResidueMatrix, max_points: u64) -> Result<PretailTree> {
    let spec = m.spec();
    let chain = kernel_chain(m);
    let ker_sz = chain.sizes.last().expect("nonempty");
    if ker_sz.to_u64().map(|s| s > max_points).unwrap_or(true) {
        return Err(Error::EnumerationCap { required: ker_sz.clone(), cap: max_points });
    }
    let stable = m.pow(chain.m_stable as u128);
    let module = SolutionModule::kernel(&stable.lift(), spec.d(), spec.n());
    let mut points: Vec<Vec<u64>> = module.iter().collect();
    points.sort();
    points.dedup();
    if BigUint::from(points.len() as u64) != *ker_sz {
        return Err(Error::Internal("stable kernel enumeration is inconsistent".into()));
    }

    let index_of = |pt: &[u64]| points.binary_search_by(|q| q.as_slice().cmp(pt)).ok();
    let size = points.len();
    let mut parent = vec![None; size];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); size];
    for (i, pt) in points.iter().enumerate() {
        if pt.iter().all(|&c| c == 0) {
            continue; // root keeps no parent: its periodic predecessor is itself
        }
        let img = m.apply(pt);
        let j = index_of(&img).ok_or_else(|| {
            Error::Internal("kernel is not closed under the action".into())
        })?;
        parent[i] = Some(j);
        children[j].push(i);
    }

    // Depths by BFS from the root (index of 0 is 0 after the lex sort).
    let mut depth = vec![u32::MAX; size];
    depth[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for &c in &children[v] {
            depth[c] = depth[v] + 1;
            queue.push_back(c);
        }
    }
    if depth.contains(&u32::MAX) {
        return Err(Error::Internal("pretail tree is not connected to the root".into()));
    }

    let height = depth.iter().copied().max().unwrap_or(0);
    if height != chain.m_stable {
        return Err(Error::Internal(format!(
            "tree height {height} must equal the kernel stabilisation index {}",
            chain.m_stable
        )));
    }
    let mut v = vec![0u64; height as usize + 1];
    let mut w = vec![0u64; height as usize + 1];
    for i in 0..size {
        v[depth[i] as usize] += 1;
        if !children[i].is_empty() {
            w[depth[i] as usize] += 1;
        }
    }
    debug_assert_eq!(w[0], if size > 1 { 1 } else { 0 });

    Ok(PretailTree { points, parent, depth, children, v, w, height })
}

impl PretailTree {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[Vec<u64>] {
        &self.points
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn depth(&self, i: usize) -> u32 {
        self.depth[i]
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.children[i].is_empty() && i != 0)
    }

    /// Canonical AHU code; two trees are isomorphic iff their codes match.
    pub fn canonical_code(&self) -> String {
        ahu_code(0, &|i| self.children[i].clone())
    }
}

/// Canonical code of a rooted tree: sorted concatenation of child codes in
/// parentheses. Iterative, so arbitrarily deep tails are fine.
pub(crate) fn ahu_code(root: usize, children: &dyn Fn(usize) -> Vec<usize>) -> String {
    enum Frame {
        Enter(usize),
        Exit(usize),
    }
    let mut codes: std::collections::HashMap<usize, String> = Default::default();
    let mut stack = vec![Frame::Enter(root)];
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Enter(v) => {
                stack.push(Frame::Exit(v));
                for c in children(v) {
                    stack.push(Frame::Enter(c));
                }
            }
            Frame::Exit(v) => {
                let mut cs: Vec<String> = children(v)
                    .into_iter()
                    .map(|c| codes.remove(&c).expect("post-order"))
                    .collect();
                cs.sort();
                codes.insert(v, format!("({})", cs.concat()));
            }
        }
    }
    codes.remove(&root).expect("root code")
}

/// Joint verdict of the three equivalent same-length conditions:
/// (i) all maximal pretails have length m, (ii) v_i = w_i != 0 below the
/// height, (iii) |ker(M^{i+1})| = |ker M|^{i+1} below the height. The three
/// must agree; disagreement is reported as an internal error.
#[derive(Debug, Clone)]
pub struct UniformDepthReport {
    pub holds: bool,
    pub same_length: bool,
    pub profile_match: bool,
    pub kernel_growth: bool,
    pub witnesses: Vec<String>,
}

pub fn uniform_depth_check(tree: &PretailTree, chain: &KernelChain) -> Result<UniformDepthReport> {
    let m = tree.height;
    let mut witnesses = Vec::new();

    let mut same_length = true;
    for leaf in tree.leaves() {
        if tree.depth(leaf) != m {
            same_length = false;
            witnesses.push(format!(
                "leaf {:?} has depth {} < height {m}",
                tree.points()[leaf],
                tree.depth(leaf)
            ));
            break;
        }
    }

    let mut profile_match = true;
    for i in 0..m as usize {
        if tree.v[i] != tree.w[i] || tree.w[i] == 0 {
            profile_match = false;
            witnesses.push(format!("v_{i} = {} but w_{i} = {}", tree.v[i], tree.w[i]));
            break;
        }
    }
    if m > 0 && tree.w[m as usize] != 0 {
        profile_match = false;
        witnesses.push(format!("w_{m} = {} is nonzero at the height", tree.w[m as usize]));
    }

    let mut kernel_growth = true;
    let base = &chain.sizes[1.min(chain.sizes.len() - 1)];
    for i in 0..m as usize {
        if chain.sizes[i + 1] != base.pow(i as u32 + 1) {
            kernel_growth = false;
            witnesses.push(format!(
                "|ker M^{}| = {} differs from |ker M|^{} = {}",
                i + 1,
                chain.sizes[i + 1],
                i + 1,
                base.pow(i as u32 + 1)
            ));
            break;
        }
    }

    if same_length != profile_match || profile_match != kernel_growth {
        return Err(Error::Internal(format!(
            "equivalent same-length conditions disagree: ({same_length}, {profile_match}, {kernel_growth})"
        )));
    }
    Ok(UniformDepthReport {
        holds: same_length,
        same_length,
        profile_match,
        kernel_growth,
        witnesses,
    })
}

// ---------------------------------------------------------------------------
// Block diagonalisation over Z/p^rZ
// ---------------------------------------------------------------------------

/// M conjugated over Z/p^rZ to diag(A, B) with A invertible (acting on Mper,
/// free of rank d') and B nilpotent (acting on the stable kernel).
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub p: u64,
    pub r: u32,
    pub d_prime: usize,
    /// Unit-determinant P with P^{-1} M P = diag(A, B); columns are a basis
    /// of Mper followed by a basis of the stable kernel.
    pub basis_change: ResidueMatrix,
    pub invertible_block: Option<ResidueMatrix>,
    pub nilpotent_block: Option<ResidueMatrix>,
    /// Least s with B^s = 0 (0 when there is no nilpotent block).
    pub nil_degree: u32,
}

pub fn block_decompose(m: &IntMatrix, p: u64, r: u32) -> Result<BlockDecomposition> {
    if !arith::is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    if r < 1 {
        return Err(Error::Precondition("need r >= 1".into()));
    }
    let q = p.checked_pow(r).ok_or(Error::Overflow("p^r"))?;
    let d = m.d();
    let mq = m.reduce(q)?;
    let chain = kernel_chain(&mq);
    let spec = mq.spec();

    let decomposition = if chain.m_stable == 0 {
        // invertible: trivial basis, A = M
        BlockDecomposition {
            p,
            r,
            d_prime: d,
            basis_change: ResidueMatrix::identity(spec),
            invertible_block: Some(mq.clone()),
            nilpotent_block: None,
            nil_degree: 0,
        }
    } else if mq.pow(chain.m_stable as u128).is_zero() {
        // nilpotent: the whole lattice is the stable kernel, B = M
        let mut nil_degree = 0u32;
        let mut pw = ResidueMatrix::identity(spec);
        while !pw.is_zero() {
            pw = pw.mul(&mq)?;
            nil_degree += 1;
        }
        BlockDecomposition {
            p,
            r,
            d_prime: 0,
            basis_change: ResidueMatrix::identity(spec),
            invertible_block: None,
            nilpotent_block: Some(mq.clone()),
            nil_degree,
        }
    } else {
        let stable = mq.pow(chain.m_stable as u128);
        let dec = smith_decompose(&stable.lift(), d);
        let qq = BigInt::from(q);
        // Over the local ring every Smith invariant of the stable power is a
        // unit or zero mod p^r; that is exactly freeness of both summands.
        let mut per_cols: Vec<Vec<u64>> = Vec::new();
        let mut ker_cols: Vec<Vec<u64>> = Vec::new();
        for i in 0..d {
            let g = num_integer::Integer::gcd(&dec.diag[i], &qq)
                .to_u64()
                .expect("divides q");
            if g == 1 {
                per_cols.push((0..d).map(|row| bigint_mod_u64(&dec.lhs_inv[row][i], q)).collect());
            } else if g == q {
                ker_cols.push((0..d).map(|row| bigint_mod_u64(&dec.rhs[row][i], q)).collect());
            } else {
                return Err(Error::Internal(format!(
                    "stable power has Smith invariant gcd {g} (neither unit nor zero mod {q})"
                )));
            }
        }
        let d_prime = per_cols.len();
        if d_prime + ker_cols.len() != d {
            return Err(Error::Internal("basis column count mismatch".into()));
        }
        let mut entries = vec![0u64; d * d];
        for (j, col) in per_cols.iter().chain(ker_cols.iter()).enumerate() {
            for (i, &val) in col.iter().enumerate() {
                entries[i * d + j] = val;
            }
        }
        let basis = ResidueMatrix::from_u64(entries, spec)?;
        let basis_inv = basis.inverse().ok_or_else(|| {
            Error::Internal("assembled Mper/kernel basis is not a unit".into())
        })?;
        let conj = basis_inv.mul(&mq)?.mul(&basis)?;
        for i in 0..d {
            for j in 0..d {
                let in_block = (i < d_prime) == (j < d_prime);
                if !in_block && conj.get(i, j) != 0 {
                    return Err(Error::Internal(
                        "conjugated matrix is not block diagonal".into(),
                    ));
                }
            }
        }
        let take_block = |lo: usize, hi: usize| -> Result<Option<ResidueMatrix>> {
            if lo == hi {
                return Ok(None);
            }
            let bd = hi - lo;
            let sub = LatticeSpec::new(bd, q)?;
            let mut e = Vec::with_capacity(bd * bd);
            for i in lo..hi {
                for j in lo..hi {
                    e.push(conj.get(i, j));
                }
            }
            Ok(Some(ResidueMatrix::from_u64(e, sub)?))
        };
        let a = take_block(0, d_prime)?;
        let b = take_block(d_prime, d)?;
        if let Some(a) = &a {
            if !a.is_invertible() {
                return Err(Error::Internal("A block is not invertible".into()));
            }
        }
        let mut nil_degree = 0u32;
        if let Some(b) = &b {
            let mut pw = ResidueMatrix::identity(b.spec());
            loop {
                if pw.is_zero() {
                    break;
                }
                pw = pw.mul(b)?;
                nil_degree += 1;
                if nil_degree > chain.m_stable {
                    return Err(Error::Internal("B block is not nilpotent".into()));
                }
            }
        }
        BlockDecomposition {
            p,
            r,
            d_prime,
            basis_change: basis,
            invertible_block: a,
            nilpotent_block: b,
            nil_degree,
        }
    };

    // d' must not depend on r.
    if r > 1 {
        let base = block_decompose(m, p, 1)?;
        if base.d_prime != decomposition.d_prime {
            return Err(Error::Internal(format!(
                "rank of Mper changed between r = 1 ({}) and r = {r} ({})",
                base.d_prime, decomposition.d_prime
            )));
        }
    }
    Ok(decomposition)
}

/// lcm of the cycle lengths of M on (Z/nZ)^d (the order of the invertible
/// block), in factored form, assembled per prime power.
pub(crate) fn invertible_part_factored_order(m: &ResidueMatrix) -> Result<BTreeMap<u64, u32>> {
    let n = m.n();
    let mut acc: BTreeMap<u64, u32> = BTreeMap::new();
    for q in arith::crt_split(n) {
        let p = arith::factor(q).into_iter().next().expect("prime power").0;
        let r = q.ilog(p);
        let dec = block_decompose(&m.reduce_mod(q)?.lift_int(), p, r)?;
        if let Some(a) = dec.invertible_block {
            let f = order::factored_order(&a)?
                .ok_or_else(|| Error::Internal("A block must be invertible".into()))?;
            for (pp, e) in f {
                let cur = acc.entry(pp).or_insert(0);
                *cur = (*cur).max(e);
            }
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Minimal polynomials over F_p and nilpotent Jordan structure
// ---------------------------------------------------------------------------

/// mu_M(x) = x^s f(x) over F_p with f(0) != 0; ord_f is the order of f,
/// the least l with f(x) | x^l - 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinPolySplit {
    pub p: u64,
    /// Monic minimal polynomial, ascending coefficients.
    pub mu: Vec<u64>,
    pub s: u32,
    /// Monic cofactor with nonzero constant term (possibly the constant 1).
    pub f: Vec<u64>,
    pub ord_f: u128,
}

pub fn minimal_poly_split(m: &IntMatrix, p: u64) -> Result<MinPolySplit> {
    if !arith::is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    let d = m.d();
    let mp = m.reduce(p)?;
    let mu = minimal_polynomial(&mp);
    let s = mu
        .iter()
        .position(|&c| c != 0)
        .expect("monic polynomial has a nonzero coefficient") as u32;
    let f: Vec<u64> = mu[s as usize..].to_vec();
    let ord_f = poly_order(&f, p)?;
    debug_assert!(mu.len() <= d + 1);
    Ok(MinPolySplit { p, mu, s, f, ord_f })
}

/// Least-degree monic annihilator of M over F_p, by incremental elimination
/// on vec(1), vec(M), vec(M^2), ...
fn minimal_polynomial(m: &ResidueMatrix) -> Vec<u64> {
    let d = m.d();
    let p = m.n();
    if p == 1 {
        return vec![0, 1]; // the zero ring: x annihilates everything
    }
    // basis rows: (reduced vector, pivot column, expression in powers)
    let mut rows: Vec<(Vec<u64>, usize, Vec<u64>)> = Vec::new();
    let mut power = ResidueMatrix::identity(m.spec());
    for k in 0..=d {
        let mut vec: Vec<u64> = power.entries().to_vec();
        let mut combo = vec![0u64; k + 1];
        combo[k] = 1;
        for (row, pivot, expr) in &rows {
            let c = vec[*pivot];
            if c != 0 {
                for (t, r) in vec.iter_mut().zip(row) {
                    *t = arith::sub_mod(*t, arith::mul_mod(c, *r, p), p);
                }
                for (t, e) in combo.iter_mut().zip(expr) {
                    *t = arith::sub_mod(*t, arith::mul_mod(c, *e, p), p);
                }
            }
        }
        match vec.iter().position(|&x| x != 0) {
            None => {
                // dependency: combo gives the minimal polynomial, monic in x^k
                debug_assert_eq!(combo[k], 1);
                return combo;
            }
            Some(pivot) => {
                let inv = arith::inv_mod(vec[pivot], p).expect("prime field");
                for t in vec.iter_mut() {
                    *t = arith::mul_mod(*t, inv, p);
                }
                let mut expr = combo;
                for t in expr.iter_mut() {
                    *t = arith::mul_mod(*t, inv, p);
                }
                expr.resize(d + 1, 0);
                rows.push((vec, pivot, expr));
            }
        }
        power = power.mul(m).expect("same spec");
    }
    unreachable!("Cayley-Hamilton bounds the minimal polynomial degree by d")
}

/// ord(f, p) for monic f with f(0) != 0; ord(1, p) = 1 by convention.
fn poly_order(f: &[u64], p: u64) -> Result<u128> {
    let deg = f.len() - 1;
    if deg == 0 {
        return Ok(1);
    }
    debug_assert!(!f[0].is_multiple_of(p), "f(0) must be a unit");
    // iterate x^l mod f until it is the constant 1
    let cap: u128 = 10_000_000;
    let mut r = vec![0u64; deg.max(1)];
    if deg == 1 {
        // x = -f_0 mod f
        r[0] = arith::sub_mod(0, f[0], p);
    } else {
        r[1] = 1;
    }
    let mut l: u128 = 1;
    loop {
        if r[0] != 0 && r.iter().skip(1).all(|&c| c == 0) && r[0] == 1 {
            return Ok(l);
        }
        if l >= cap {
            return Err(Error::SearchCap {
                required: BigUint::from(p).pow(deg as u32),
                cap: cap as u64,
            });
        }
        // r <- r * x mod f
        let lead = r[deg - 1];
        for i in (1..deg).rev() {
            r[i] = r[i - 1];
        }
        r[0] = 0;
        if lead != 0 {
            for i in 0..deg {
                r[i] = arith::sub_mod(r[i], arith::mul_mod(lead, f[i], p), p);
            }
        }
        l += 1;
    }
}

/// Jordan block sizes of a matrix nilpotent mod p, recovered from kernel
/// dimensions: the number of blocks of size >= j is
/// dim ker(M^j) - dim ker(M^{j-1}).
pub fn nilpotent_jordan_profile(m: &IntMatrix, p: u64) -> Result<Vec<usize>> {
    if !arith::is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    let d = m.d();
    let mp = m.reduce(p)?;
    if !mp.pow(d as u128).is_zero() {
        return Err(Error::Precondition("matrix is not nilpotent mod p".into()));
    }
    let mut dims = vec![0usize]; // dim ker(M^0)
    let mut power = ResidueMatrix::identity(mp.spec());
    for _ in 1..=d {
        power = power.mul(&mp).expect("same spec");
        dims.push(d - fp_rank(&power));
    }
    let blocks_ge: Vec<usize> = (1..=d).map(|j| dims[j] - dims[j - 1]).collect();
    let mut partition = Vec::new();
    for i in 1..=blocks_ge[0] {
        partition.push(blocks_ge.iter().filter(|&&b| b >= i).count());
    }
    partition.sort_unstable_by(|a, b| b.cmp(a));
    Ok(partition)
}

/// Rank of a matrix over the prime field Z/pZ.
#[allow(clippy::needless_range_loop)]
fn fp_rank(m: &ResidueMatrix) -> usize {
    let d = m.d();
    let p = m.n();
    if p == 1 {
        return 0;
    }
    let mut a: Vec<Vec<u64>> = (0..d)
        .map(|i| (0..d).map(|j| m.get(i, j)).collect())
        .collect();
    let mut rank = 0usize;
    for col in 0..d {
        let Some(pivot_row) = (rank..d).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, pivot_row);
        let inv = arith::inv_mod(a[rank][col], p).expect("prime field");
        for j in 0..d {
            a[rank][j] = arith::mul_mod(a[rank][j], inv, p);
        }
        for r in 0..d {
            if r != rank && a[r][col] != 0 {
                let c = a[r][col];
                for j in 0..d {
                    a[r][j] = arith::sub_mod(a[r][j], arith::mul_mod(c, a[rank][j], p), p);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Level profile (v, w) of the pretail tree of a single elementary shift
/// block of the given size acting on (Z/nZ)^size: every maximal pretail has
/// the block size as its length, and every internal non-root node has
/// exactly n children.
pub fn shift_block_tree_profile(size: usize, n: u64) -> Result<(Vec<u64>, Vec<u64>)> {
    assert!(size >= 1 && n >= 2);
    let mut v = vec![1u64];
    let mut w = vec![1u64];
    for i in 1..=size {
        let vi = n
            .checked_pow(i as u32 - 1)
            .and_then(|x| x.checked_mul(n - 1))
            .ok_or(Error::Overflow("shift block profile"))?;
        v.push(vi);
        w.push(if i < size { vi } else { 0 });
    }
    Ok((v, w))
}
