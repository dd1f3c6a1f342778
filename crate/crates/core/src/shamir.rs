//! Shamir k-out-of-n sharing over GF(p).
//!
//! Participant `i` receives `(i, f(i))` where `f(0)` is the secret. The
//! perfectness audit enumerates every polynomial of degree < k and checks that
//! each sub-threshold coalition sees the same share distribution for every
//! secret.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::access::Coalition;
use crate::error::{Error, Result};
use crate::field::{
    interpolate_at_zero, lagrange_coefficients_at_zero, poly_eval, FieldElement, PrimeField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Share {
    pub participant: usize,
    pub x: FieldElement,
    pub y: FieldElement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dealing {
    pub p: u64,
    pub n: usize,
    pub k: usize,
    pub shares: Vec<Share>,
}

impl Dealing {
    pub fn params(&self) -> ShareParams {
        ShareParams {
            p: self.p,
            k: self.k,
            n: self.n,
        }
    }
}

fn check_params(p: u64, k: usize, n: usize) -> Result<()> {
    if n as u64 >= p {
        return Err(Error::TooManyParticipants { n, p });
    }
    if k < 1 || k > n {
        return Err(Error::BadThreshold { k, n });
    }
    Ok(())
}

/// Deals `secret` with a random polynomial of degree `k - 1` drawn from `rng`.
pub fn deal<R: Rng + ?Sized>(
    secret: FieldElement,
    k: usize,
    n: usize,
    rng: &mut R,
) -> Result<Dealing> {
    let field = secret.field();
    check_params(field.modulus(), k, n)?;
    let mut coeffs = Vec::with_capacity(k);
    coeffs.push(secret);
    for _ in 1..k {
        coeffs.push(field.element(rng.gen_range(0..field.modulus())));
    }
    deal_with_polynomial(&coeffs, n)
}

/// Deals shares of the polynomial `coeffs` (constant term first); `k = coeffs.len()`.
pub fn deal_with_polynomial(coeffs: &[FieldElement], n: usize) -> Result<Dealing> {
    let Some(first) = coeffs.first() else {
        return Err(Error::EmptyInput("polynomial has no coefficients"));
    };
    let field = first.field();
    let k = coeffs.len();
    check_params(field.modulus(), k, n)?;
    let shares = (1..=n)
        .map(|i| {
            let x = field.element(i as u64);
            Ok(Share {
                participant: i,
                x,
                y: poly_eval(coeffs, x)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Dealing {
        p: field.modulus(),
        n,
        k,
        shares,
    })
}

/// Interpolates the shares at zero. Returns the secret whenever at least `k`
/// genuine shares of one dealing are supplied; fewer give an unrelated value.
pub fn reconstruct(shares: &[Share], p: u64) -> Result<FieldElement> {
    let field = PrimeField::new(p)?;
    let points: Vec<_> = shares
        .iter()
        .map(|s| (field.element(s.x.value()), field.element(s.y.value())))
        .collect();
    interpolate_at_zero(&points)
}

/// Parameters stored in the JSON sidecar next to a share file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShareParams {
    pub p: u64,
    pub k: usize,
    pub n: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ShareRow {
    participant: usize,
    x: u64,
    y: u64,
}

/// Writes shares as CSV with a `participant,x,y` header.
pub fn write_shares_csv<W: Write>(shares: &[Share], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in shares {
        w.serialize(ShareRow {
            participant: s.participant,
            x: s.x.value(),
            y: s.y.value(),
        })?;
    }
    w.flush()
}

/// Parses a share CSV. Values are reduced into GF(p).
pub fn read_shares_csv<R: Read>(
    input: R,
    p: u64,
) -> std::result::Result<Vec<Share>, ShareFileError> {
    let field = PrimeField::new(p).map_err(ShareFileError::Field)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers().map_err(ShareFileError::Csv)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["participant", "x", "y"] {
        return Err(ShareFileError::Header(
            headers.iter().collect::<Vec<_>>().join(","),
        ));
    }
    reader
        .deserialize::<ShareRow>()
        .map(|row| {
            let row = row.map_err(ShareFileError::Csv)?;
            Ok(Share {
                participant: row.participant,
                x: field.element(row.x),
                y: field.element(row.y),
            })
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum ShareFileError {
    #[error("malformed share file: {0}")]
    Csv(csv::Error),
    #[error("expected header `participant,x,y`, found `{0}`")]
    Header(String),
    #[error(transparent)]
    Field(Error),
}

/// Outcome of the audit for one coalition of fewer than `k` participants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoalitionAudit {
    pub coalition: Vec<usize>,
    /// Polynomials per (secret, share tuple), when that count is the same everywhere.
    pub uniform_count: Option<u64>,
    /// Whether every secret induces the same count over share tuples.
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub p: u64,
    pub k: usize,
    pub n: usize,
    /// Polynomials enumerated per secret (`p^(k-1)`).
    pub polynomials_per_secret: u64,
    pub sub_threshold: Vec<CoalitionAudit>,
    pub authorized_coalitions: usize,
    pub reconstruction_ok: bool,
    pub pass: bool,
}

pub const AUDIT_MAX_P: u64 = 101;
pub const AUDIT_MAX_N: usize = 6;
/// Cap on `p^k * 2^n`, the number of (polynomial, coalition) pairs visited.
pub const AUDIT_MAX_WORK: u128 = 1 << 26;

/// Exhaustively checks perfectness and reconstruction of the k-out-of-n scheme over GF(p).
pub fn perfectness_audit(p: u64, k: usize, n: usize) -> Result<AuditReport> {
    if p > AUDIT_MAX_P || n > AUDIT_MAX_N {
        return Err(Error::AuditTooLarge(format!(
            "need p <= {AUDIT_MAX_P} and n <= {AUDIT_MAX_N}, got p = {p}, n = {n}"
        )));
    }
    let field = PrimeField::new(p)?;
    check_params(p, k, n)?;
    let work = u128::from(p).pow(k as u32) << n;
    if work > AUDIT_MAX_WORK {
        return Err(Error::AuditTooLarge(format!(
            "p^k * 2^n = {work} exceeds {AUDIT_MAX_WORK}"
        )));
    }

    let coalitions: Vec<Coalition> = (0u32..1 << n).map(Coalition::from_mask).collect();
    let (small, large): (Vec<Coalition>, Vec<Coalition>) =
        coalitions.into_iter().partition(|c| c.len() < k);

    // counts[c][secret * p^|S| + tuple]
    let mut counts: Vec<Vec<u64>> = small
        .iter()
        .map(|c| vec![0u64; (p as usize).pow(c.len() as u32 + 1)])
        .collect();
    let small_members: Vec<Vec<usize>> = small.iter().map(|c| c.members()).collect();
    let large_members: Vec<Vec<usize>> = large.iter().map(|c| c.members()).collect();
    let lagrange: Vec<Vec<FieldElement>> = large_members
        .iter()
        .map(|members| {
            let xs: Vec<_> = members.iter().map(|&i| field.element(i as u64)).collect();
            lagrange_coefficients_at_zero(&xs)
        })
        .collect::<Result<_>>()?;

    let polys_per_secret = p.pow(k as u32 - 1);
    let mut reconstruction_ok = true;
    let mut coeffs = vec![field.zero(); k];
    let mut evals = vec![field.zero(); n + 1];
    for secret in 0..p {
        coeffs[0] = field.element(secret);
        for index in 0..polys_per_secret {
            let mut rest = index;
            for c in coeffs.iter_mut().skip(1) {
                *c = field.element(rest % p);
                rest /= p;
            }
            for (x, e) in evals.iter_mut().enumerate().skip(1) {
                *e = poly_eval(&coeffs, field.element(x as u64))?;
            }
            for (members, slots) in small_members.iter().zip(counts.iter_mut()) {
                let slot = members
                    .iter()
                    .fold(secret, |acc, &i| acc * p + evals[i].value());
                slots[slot as usize] += 1;
            }
            for (members, ls) in large_members.iter().zip(&lagrange) {
                let got = members
                    .iter()
                    .zip(ls)
                    .fold(field.zero(), |acc, (&i, &l)| acc + l * evals[i]);
                reconstruction_ok &= got == coeffs[0];
            }
        }
    }

    let sub_threshold: Vec<CoalitionAudit> = small
        .iter()
        .zip(&counts)
        .map(|(c, slots)| {
            let per_secret = slots.len() / p as usize;
            let first = &slots[..per_secret];
            let pass = slots.chunks(per_secret).all(|chunk| chunk == first);
            let uniform_count = slots.iter().all(|&v| v == slots[0]).then_some(slots[0]);
            CoalitionAudit {
                coalition: c.members(),
                uniform_count,
                pass,
            }
        })
        .collect();
    let pass = reconstruction_ok && sub_threshold.iter().all(|a| a.pass);
    Ok(AuditReport {
        p,
        k,
        n,
        polynomials_per_secret: polys_per_secret,
        sub_threshold,
        authorized_coalitions: large.len(),
        reconstruction_ok,
        pass,
    })
}

/// Share tuples seen by a coalition, keyed by the tuple, for one fixed secret.
/// Used by tests as a slower cross-check of the audit's counting.
pub fn share_distribution(
    p: u64,
    k: usize,
    coalition: &[usize],
    secret: u64,
) -> Result<BTreeMap<Vec<u64>, u64>> {
    let field = PrimeField::new(p)?;
    let mut out = BTreeMap::new();
    for index in 0..p.pow(k as u32 - 1) {
        let mut rest = index;
        let mut coeffs = vec![field.element(secret)];
        for _ in 1..k {
            coeffs.push(field.element(rest % p));
            rest /= p;
        }
        let tuple = coalition
            .iter()
            .map(|&i| poly_eval(&coeffs, field.element(i as u64)).map(|v| v.value()))
            .collect::<Result<Vec<_>>>()?;
        *out.entry(tuple).or_insert(0) += 1;
    }
    Ok(out)
}
