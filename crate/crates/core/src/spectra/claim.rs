use serde::Serialize;

use crate::error::Result;
use crate::gfq::{is_prime, FieldCtx};

#[derive(Clone, Debug, Serialize)]
pub struct ClaimRestReport {
    pub q: u64,
    pub checked: usize,
    /// Exponents `k` with `c = zeta^{(q-1) k}` where the identity fails.
    pub failures: Vec<u64>,
}

/// Check `((c - 1)^2 / c)^{(q-1)/2} = -c^{(q+1)/2}` in `F_{q^2}` for every
/// `c != 1` with `c^{q+1} = 1`, `q = p^m`.
pub fn claim_rest_identity(p: u64, m: usize) -> Result<ClaimRestReport> {
    let big = FieldCtx::new(p, 2 * m)?;
    let q = crate::gfq::checked_pow(p, m).ok_or(crate::Error::Overflow("field order"))?;
    let base = big.pow(big.generator(), (q - 1) as u128);
    let mut c = big.one();
    let mut failures = Vec::new();
    let mut checked = 0;
    for k in 1..=q {
        c = big.mul(c, base);
        let cm1 = big.sub(c, big.one());
        let lhs = big.pow(big.div(big.square(cm1), c)?, ((q - 1) / 2) as u128);
        let rhs = big.neg(big.pow(c, ((q + 1) / 2) as u128));
        checked += 1;
        if lhs != rhs {
            failures.push(k);
        }
    }
    Ok(ClaimRestReport { q, checked, failures })
}

/// Odd prime powers `q <= bound` as `(p, m)`.
pub fn odd_prime_powers(bound: u64) -> Vec<(u64, usize)> {
    let mut out = Vec::new();
    for p in (3..=bound).step_by(2).filter(|&p| is_prime(p)) {
        let mut q = p;
        let mut m = 1;
        while q <= bound {
            out.push((p, m));
            q *= p;
            m += 1;
        }
    }
    out.sort_by_key(|&(p, m)| p.pow(m as u32));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_for_small_q() {
        for (p, m) in [(3, 1), (5, 1), (3, 2), (7, 1)] {
            let r = claim_rest_identity(p, m).unwrap();
            assert_eq!(r.checked as u64, r.q);
            assert!(r.failures.is_empty());
        }
    }

    #[test]
    fn prime_power_list() {
        let qs: Vec<u64> = odd_prime_powers(30).iter().map(|&(p, m)| p.pow(m as u32)).collect();
        assert_eq!(qs, vec![3, 5, 7, 9, 11, 13, 17, 19, 23, 25, 27, 29]);
    }
}
