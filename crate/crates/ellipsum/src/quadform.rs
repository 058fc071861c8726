//! Positive definite integral quadratic forms: exact determinant and
//! adjugate over the integers, a binary64 Cholesky factor used only to
//! guide enumeration, and ellipsoid volume.
//!
//! Exactness of `detM`/`adjM` is load-bearing: shell bucketing keys on the
//! exact integer value p = Q_M(m), so nothing here may round.

use crate::error::{Error, Result};

/// Context for the quadratic form Q_M(x) = <Mx, x>.
#[derive(Clone, Debug)]
pub struct QuadFormCtx {
    pub n: usize,
    /// Row-major integer entries of M.
    pub m: Vec<i64>,
    /// Exact determinant.
    pub det: i128,
    /// Exact adjugate (row-major), satisfying M·adjM = det·I.
    pub adj: Vec<i128>,
    /// Lower-triangular binary64 Cholesky factor L with L·Lᵀ = M.
    pub chol: Vec<f64>,
    /// |E^M| = V_n · det^{-1/2}, the volume of the unit ellipsoid of Q_M.
    pub volume: f64,
}

/// Exact rational number (reduced, positive denominator).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub num: i128,
    pub den: i128,
}

impl Ratio {
    pub fn new(num: i128, den: i128) -> Ratio {
        assert!(den != 0);
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i128;
        let sign = if den < 0 { -1 } else { 1 };
        Ratio {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    if a == 0 {
        1
    } else {
        a
    }
}

/// Fraction-free Bareiss determinant of a k×k integer matrix.
fn bareiss_det(a: &[i128], k: usize) -> i128 {
    if k == 0 {
        return 1;
    }
    let mut m = a.to_vec();
    let mut prev = 1i128;
    let mut sign = 1i128;
    for col in 0..k - 1 {
        // pivot selection: any nonzero entry in this column at or below the diagonal
        if m[col * k + col] == 0 {
            let mut swap_row = None;
            for r in col + 1..k {
                if m[r * k + col] != 0 {
                    swap_row = Some(r);
                    break;
                }
            }
            match swap_row {
                Some(r) => {
                    for c in 0..k {
                        m.swap(col * k + c, r * k + c);
                    }
                    sign = -sign;
                }
                None => return 0,
            }
        }
        let pivot = m[col * k + col];
        for r in col + 1..k {
            for c in col + 1..k {
                m[r * k + c] = (m[r * k + c] * pivot - m[r * k + col] * m[col * k + c]) / prev;
            }
            m[r * k + col] = 0;
        }
        prev = pivot;
    }
    sign * m[(k - 1) * k + (k - 1)]
}

/// Determinant of the minor of `a` (k×k) with row `i` and column `j` removed.
fn minor_det(a: &[i128], k: usize, i: usize, j: usize) -> i128 {
    let mut sub = Vec::with_capacity((k - 1) * (k - 1));
    for r in 0..k {
        if r == i {
            continue;
        }
        for c in 0..k {
            if c == j {
                continue;
            }
            sub.push(a[r * k + c]);
        }
    }
    bareiss_det(&sub, k - 1)
}

/// Unit-ball volume V_n = pi^{n/2} / Gamma(n/2 + 1).
pub fn unit_ball_volume(n: usize) -> f64 {
    // Gamma(n/2 + 1) by the half-integer recursion, exact structure in f64.
    let mut gamma = if n % 2 == 0 {
        1.0 // Gamma(1)
    } else {
        std::f64::consts::PI.sqrt() // Gamma(1/2)
    };
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    while x < n as f64 / 2.0 + 1.0 - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    std::f64::consts::PI.powf(n as f64 / 2.0) / gamma
}

/// Build a validated context from square symmetric integer input.
pub fn build_ctx(rows: &[Vec<i64>]) -> Result<QuadFormCtx> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::DimensionZero);
    }
    if n > 12 {
        return Err(Error::DimensionTooLarge { n });
    }
    for row in rows {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
    }
    for i in 0..n {
        for j in 0..i {
            if rows[i][j] != rows[j][i] {
                return Err(Error::NotSymmetric);
            }
        }
    }
    let m: Vec<i64> = rows.iter().flatten().copied().collect();
    let wide: Vec<i128> = m.iter().map(|&v| v as i128).collect();

    // Positive definiteness via leading principal minors.
    for k in 1..=n {
        let mut sub = Vec::with_capacity(k * k);
        for r in 0..k {
            for c in 0..k {
                sub.push(wide[r * n + c]);
            }
        }
        let d = bareiss_det(&sub, k);
        if d <= 0 {
            return Err(Error::NotPositiveDefinite { order: k, minor: d });
        }
    }
    let det = bareiss_det(&wide, n);

    // Adjugate by cofactors: adj[i][j] = (-1)^{i+j} det(minor with row j, col i removed).
    let mut adj = vec![0i128; n * n];
    for i in 0..n {
        for j in 0..n {
            let c = minor_det(&wide, n, j, i);
            adj[i * n + j] = if (i + j) % 2 == 0 { c } else { -c };
        }
    }
    debug_assert!({
        let mut ok = true;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0i128;
                for k in 0..n {
                    s += wide[i * n + k] * adj[k * n + j];
                }
                ok &= s == if i == j { det } else { 0 };
            }
        }
        ok
    });

    // Binary64 Cholesky (guides enumeration only; membership re-verified exactly).
    let mut chol = vec![0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i * n + j] as f64;
            for k in 0..j {
                s -= chol[i * n + k] * chol[j * n + k];
            }
            if i == j {
                // positive by the minor check above, up to rounding
                chol[i * n + i] = s.max(0.0).sqrt();
            } else {
                chol[i * n + j] = s / chol[j * n + j];
            }
        }
    }

    let volume = unit_ball_volume(n) / (det as f64).sqrt();
    Ok(QuadFormCtx {
        n,
        m,
        det,
        adj,
        chol,
        volume,
    })
}

impl QuadFormCtx {
    /// Exact Q_M(x) for an integer vector.
    pub fn qform_int(&self, x: &[i64]) -> Result<i128> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut s = 0i128;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.m[i * self.n + j] as i128 * x[i] as i128 * x[j] as i128;
            }
        }
        Ok(s)
    }

    /// Q_M(x) for a real vector.
    pub fn qform_f64(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.m[i * self.n + j] as f64 * x[i] * x[j];
            }
        }
        Ok(s)
    }

    /// |m|²_{adjM} / detM as an exact rational; equals |T*(m)|².
    pub fn dual_norm_sq(&self, x: &[i64]) -> Result<Ratio> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut s = 0i128;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.adj[i * self.n + j] * x[i] as i128 * x[j] as i128;
            }
        }
        Ok(Ratio::new(s, self.det))
    }

    /// Context for the adjugate form M̂ (entries must fit in i64).
    pub fn adjugate_ctx(&self) -> Result<QuadFormCtx> {
        let rows: Vec<Vec<i64>> = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| {
                        i64::try_from(self.adj[i * self.n + j])
                            .expect("adjugate entry exceeds i64 (beyond desk scale)")
                    })
                    .collect()
            })
            .collect();
        build_ctx(&rows)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.m[i * self.n + j] == 0))
    }
}

/// Clear denominators of a rational symmetric matrix: returns the lcm `c`
/// of all denominators and the integral context for c·Q. Radii scale as
/// R ↦ √c·R under this substitution.
pub fn rationalize(rows: &[Vec<(i64, i64)>]) -> Result<(i64, QuadFormCtx)> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::DimensionZero);
    }
    let mut c: i128 = 1;
    for row in rows {
        for &(_, q) in row {
            if q == 0 {
                return Err(Error::InvalidConfig {
                    reason: "zero denominator in rational matrix".into(),
                });
            }
            let q = q.unsigned_abs() as u128;
            c = (c.unsigned_abs() as u128 / gcd(c.unsigned_abs(), q) * q) as i128;
        }
    }
    let c = i64::try_from(c).map_err(|_| Error::InvalidConfig {
        reason: "denominator lcm overflows i64".into(),
    })?;
    let scaled: Vec<Vec<i64>> = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|&(p, q)| {
                    let sign = if q < 0 { -1 } else { 1 };
                    sign * p * (c / q.abs())
                })
                .collect()
        })
        .collect();
    Ok((c, build_ctx(&scaled)?))
}

/// Parsed matrix shape from the CLI grammar. For rational variants the
/// context is the cleared form c·Q; use `scale` (= c) to map radii R ↦ √c·R.
#[derive(Clone, Debug)]
pub struct ParsedMatrix {
    pub ctx: QuadFormCtx,
    pub scale: i64,
}

/// Parse the CLI matrix grammar:
/// `diag:a1,...,an` | `full:[[...],[...]]` | `qdiag:p/q,...` | `qfull:[[p/q,...],...]`.
pub fn parse_matrix_spec(spec: &str) -> Result<ParsedMatrix> {
    let bad = |reason: &str| Error::InvalidConfig {
        reason: format!("matrix spec `{spec}`: {reason}"),
    };
    if let Some(body) = spec.strip_prefix("diag:") {
        let diag: Vec<i64> = body
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("expected comma-separated integers"))?;
        let n = diag.len();
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { diag[i] } else { 0 }).collect())
            .collect();
        Ok(ParsedMatrix {
            ctx: build_ctx(&rows)?,
            scale: 1,
        })
    } else if let Some(body) = spec.strip_prefix("full:") {
        let rows = parse_bracket_rows(body).ok_or_else(|| bad("expected [[..],[..]]"))?;
        let rows: Vec<Vec<i64>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|t| t.trim().parse::<i64>())
                    .collect::<std::result::Result<_, _>>()
            })
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("expected integer entries"))?;
        Ok(ParsedMatrix {
            ctx: build_ctx(&rows)?,
            scale: 1,
        })
    } else if let Some(body) = spec.strip_prefix("qdiag:") {
        let diag: Vec<(i64, i64)> = body
            .split(',')
            .map(|t| parse_fraction(t.trim()))
            .collect::<Option<_>>()
            .ok_or_else(|| bad("expected comma-separated p/q entries"))?;
        let n = diag.len();
        let rows: Vec<Vec<(i64, i64)>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { diag[i] } else { (0, 1) })
                    .collect()
            })
            .collect();
        let (c, ctx) = rationalize(&rows)?;
        Ok(ParsedMatrix { ctx, scale: c })
    } else if let Some(body) = spec.strip_prefix("qfull:") {
        let rows = parse_bracket_rows(body).ok_or_else(|| bad("expected [[..],[..]]"))?;
        let rows: Vec<Vec<(i64, i64)>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|t| parse_fraction(t.trim()))
                    .collect::<Option<_>>()
            })
            .collect::<Option<_>>()
            .ok_or_else(|| bad("expected p/q entries"))?;
        let (c, ctx) = rationalize(&rows)?;
        Ok(ParsedMatrix { ctx, scale: c })
    } else {
        Err(bad("unknown prefix (use diag:/full:/qdiag:/qfull:)"))
    }
}

fn parse_fraction(t: &str) -> Option<(i64, i64)> {
    match t.split_once('/') {
        Some((p, q)) => Some((p.trim().parse().ok()?, q.trim().parse().ok()?)),
        None => Some((t.parse().ok()?, 1)),
    }
}

/// Parse `[[a,b],[c,d]]` into rows of raw cell strings.
fn parse_bracket_rows(body: &str) -> Option<Vec<Vec<String>>> {
    let body = body.trim();
    let inner = body.strip_prefix("[[")?.strip_suffix("]]")?;
    Some(
        inner
            .split("],[")
            .map(|row| row.split(',').map(|s| s.to_string()).collect())
            .collect(),
    )
}
