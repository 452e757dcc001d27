//! Closed-form cycle polynomials Z_{p^r}(t) for the Arnold and Fibonacci cat
//! maps, with the characteristic integers m_p and n_p computed rather than
//! assumed, and the plateau-free proviso verified before the generic
//! prime-power formula is applied.

use num_bigint::BigUint;
use num_traits::One;

use crate::arith;
use crate::census::{orbit_counts, FactoredPoly};
use crate::error::{Error, Result};
use crate::order::{order_lift_profile, PlateauShape};
use crate::ring::IntMatrix;

/// The two classical examples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatMap {
    Arnold,
    Fibonacci,
}

impl CatMap {
    pub fn matrix(self) -> IntMatrix {
        match self {
            CatMap::Arnold => IntMatrix::parse("2,1;1,1").unwrap(),
            CatMap::Fibonacci => IntMatrix::parse("1,1;1,0").unwrap(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CatMap::Arnold => "arnold",
            CatMap::Fibonacci => "fibonacci",
        }
    }
}

impl std::str::FromStr for CatMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "arnold" => Ok(CatMap::Arnold),
            "fibonacci" => Ok(CatMap::Fibonacci),
            other => Err(Error::Parse {
                pos: 0,
                msg: format!("unknown cat map {other:?} (expected arnold or fibonacci)"),
            }),
        }
    }
}

/// Measured per-prime data for both maps.
///
/// m_p is the order-reduction integer in
/// per_A(p) = (p - (5/p)) / (2 m_p - (1 - (5/p)) / 2) for odd p != 5;
/// n_p counts the short orbits of the Fibonacci map: the r = 1 census has
/// 2 n_p orbits of length per_F(p)/2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatMapConstants {
    pub p: u64,
    pub per_arnold: u64,
    pub m_p: Option<u64>,
    pub per_fibonacci: u64,
    pub n_p: Option<u64>,
}

pub fn catmap_constants(p: u64) -> Result<CatMapConstants> {
    if !arith::is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    let per_a = crate::order::matrix_order(&CatMap::Arnold.matrix().reduce(p)?)? as u64;
    let per_f = crate::order::matrix_order(&CatMap::Fibonacci.matrix().reduce(p)?)? as u64;
    if p != 2 && per_f != 2 * per_a {
        return Err(Error::Internal(format!(
            "per_F({p}) = {per_f} is not twice per_A({p}) = {per_a}"
        )));
    }

    let m_p = if p == 2 || p == 5 {
        None
    } else {
        // Solve per_A(p) = (p - ls) / (2 m_p - (1 - ls)/2) for m_p.
        let ls = arith::legendre(5, p);
        let numer = (p as i64) - ls;
        let twice_m = numer / per_a as i64 + (1 - ls) / 2;
        if numer % per_a as i64 != 0 || twice_m % 2 != 0 || twice_m <= 0 {
            return Err(Error::Internal(format!(
                "per_A({p}) = {per_a} does not fit the Legendre-symbol formula"
            )));
        }
        Some(twice_m as u64 / 2)
    };

    let n_p = if p == 2 || p == 5 {
        None
    } else {
        let census = orbit_counts(&CatMap::Fibonacci.matrix().reduce(p)?)?;
        let short = num_traits::ToPrimitive::to_u64(&census.count_of(per_f as u128 / 2))
            .ok_or(Error::Overflow("n_p"))?;
        if short % 2 != 0 {
            return Err(Error::Internal(format!(
                "short-orbit count {short} at p = {p} must be even"
            )));
        }
        // Everything else must be fixed points or full-length orbits.
        for &(len, _) in census.cycles() {
            if len != 1 && len != per_f as u128 / 2 && len != per_f as u128 {
                return Err(Error::Internal(format!(
                    "unexpected Fibonacci orbit length {len} mod {p}"
                )));
            }
        }
        Some(short / 2)
    };

    Ok(CatMapConstants { p, per_arnold: per_a, m_p, per_fibonacci: per_f, n_p })
}

/// Refuses the generic formula when the plateau phenomenon is present at p.
fn check_plateau_free(map: CatMap, p: u64) -> Result<()> {
    let profile = order_lift_profile(&map.matrix(), p, 2)?;
    match profile.shape {
        PlateauShape::NoPlateau => Ok(()),
        _ => Err(Error::PlateauProviso { p, s: profile.s }),
    }
}

/// The closed-form Z_{p^r}(t) for a cat map, in the structured (per-shell)
/// factorisation: one group of factors per level l = 0..r-1 describing the
/// new orbits on L_{p^{l+1}} \ L_{p^l}.
pub fn catmap_closed_form(map: CatMap, p: u64, r: u32) -> Result<FactoredPoly> {
    if !arith::is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    if r < 1 {
        return Err(Error::Precondition("need r >= 1".into()));
    }
    let pw = |l: u32| -> Result<u128> {
        (p as u128)
            .checked_pow(l)
            .ok_or(Error::Overflow("p^l in closed form"))
    };
    let big = |x: u128| BigUint::from(x);

    let mut factors: Vec<(u128, BigUint)> = vec![(1, BigUint::one())];
    match (map, p) {
        (CatMap::Arnold, 2) => {
            // (1-t)(1-t^3) prod_{l=0}^{r-2} (1-t^{3*2^l})^{4*2^l}
            factors.push((3, BigUint::one()));
            for l in 0..r.saturating_sub(1) {
                let len = 3u128.checked_mul(pw(l)?).ok_or(Error::Overflow("cycle length"))?;
                factors.push((len, big(4) * big(pw(l)?)));
            }
        }
        (CatMap::Arnold, 5) => {
            // (1-t) prod_{l=0}^{r-1} ((1-t^{2*5^l})(1-t^{10*5^l}))^{2*5^l}
            for l in 0..r {
                let e = big(2) * big(pw(l)?);
                factors.push((2 * pw(l)?, e.clone()));
                factors.push((10 * pw(l)?, e));
            }
        }
        (CatMap::Arnold, _) => {
            check_plateau_free(map, p)?;
            let consts = catmap_constants(p)?;
            let per = consts.per_arnold as u128;
            let count0 = (p as u128 * p as u128 - 1) / per;
            for l in 0..r {
                let len = per.checked_mul(pw(l)?).ok_or(Error::Overflow("cycle length"))?;
                factors.push((len, big(count0) * big(pw(l)?)));
            }
        }
        (CatMap::Fibonacci, 2) => {
            // (1-t) prod_{l=0}^{r-1} (1-t^{3*2^l})^{2^l}
            for l in 0..r {
                factors.push((3 * pw(l)?, big(pw(l)?)));
            }
        }
        (CatMap::Fibonacci, 5) => {
            // (1-t) prod_{l=0}^{r-1} ((1-t^{4*5^l})(1-t^{20*5^l}))^{5^l}
            for l in 0..r {
                factors.push((4 * pw(l)?, big(pw(l)?)));
                factors.push((20 * pw(l)?, big(pw(l)?)));
            }
        }
        (CatMap::Fibonacci, _) => {
            check_plateau_free(map, p)?;
            let consts = catmap_constants(p)?;
            let per = consts.per_fibonacci as u128;
            let n_p = consts.n_p.expect("odd p != 5") as u128;
            let full0 = (p as u128 * p as u128 - 1) / per;
            for l in 0..r {
                let half = (per / 2).checked_mul(pw(l)?).ok_or(Error::Overflow("length"))?;
                if n_p > 0 {
                    factors.push((half, big(2 * n_p)));
                }
                let full_count = full0 * pw(l)? - n_p;
                factors.push((per * pw(l)?, big(full_count)));
            }
        }
    }
    Ok(FactoredPoly::new(factors))
}
