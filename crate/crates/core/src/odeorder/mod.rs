//! Order lower bounds for transcendental solutions of algebraic differential
//! equations `sum_t c_t(z) f^{t_0} (f')^{t_1} ... (f^{(n)})^{t_n} = 0` with a
//! direct singularity over infinity.
//!
//! All arithmetic is exact over the Gaussian rationals.

mod parse;
mod poly;

pub use parse::{parse_equation, DiffMonomial, ParseError, MAX_ORDER};
pub use poly::{GaussRat, Poly};

use crate::growth::GrowthProfile;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OdeError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("at least two distinct weights are needed")]
    InsufficientTerms,
    #[error("no kappa candidates to compare with")]
    NoKappaCandidates,
    #[error("no registered model solves {0}")]
    UnregisteredEquation(String),
    #[error("profile of {found} does not belong to a solution ({expected})")]
    ModelMismatch { expected: String, found: String },
    #[error("too few samples with a defined a(r) in the top decade")]
    TooFewSamples,
    #[error("bad monomial list: {0}")]
    BadInput(String),
}

fn ser_rational<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn ser_rationals<S: Serializer>(qs: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(qs.iter().map(|q| q.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Verdict {
    /// The order of a transcendental meromorphic solution with a direct
    /// singularity over infinity is at least `bound`.
    Bound {
        #[serde(serialize_with = "ser_rational")]
        bound: BigRational,
    },
    /// Only one monomial of maximal degree: no such solution exists.
    SingletonS,
    /// The leading sums vanish for these weights, so no conclusion.
    HypothesisFails { lambdas: Vec<u32>, reason: String },
}

/// `u_lambda = sum of c_s over maximal-degree monomials of weight lambda`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LeadingSum {
    pub lambda: u32,
    #[serde(serialize_with = "ser_poly")]
    pub u: Poly,
    pub nonzero: bool,
    /// Leading coefficient `b_lambda` of `u`.
    #[serde(serialize_with = "ser_opt_gauss")]
    pub b: Option<GaussRat>,
    /// Degree `d_lambda` of `u`.
    pub d: Option<u32>,
}

fn ser_poly<S: Serializer>(p: &Poly, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

fn ser_opt_gauss<S: Serializer>(g: &Option<GaussRat>, s: S) -> Result<S::Ok, S::Error> {
    match g {
        Some(g) => s.serialize_some(&g.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OrderBoundResult {
    /// Indices of the monomials of maximal degree.
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    /// Positive weights of the members of `S`.
    #[serde(rename = "Lambda")]
    pub lambda: Vec<u32>,
    pub leading_sums: Vec<LeadingSum>,
    pub verdict: Verdict,
    #[serde(serialize_with = "ser_rationals")]
    pub kappa_candidates: Vec<BigRational>,
    /// Set when a weight-0 member of `S` was left out of `Lambda`.
    pub zero_weight_policy: Option<String>,
}

impl OrderBoundResult {
    pub fn bound(&self) -> Option<&BigRational> {
        match &self.verdict {
            Verdict::Bound { bound } => Some(bound),
            _ => None,
        }
    }
}

/// Applies the order bound to a parsed equation.
pub fn order_bound(monomials: &[DiffMonomial]) -> OrderBoundResult {
    let d_max = monomials.iter().map(DiffMonomial::degree).max().unwrap_or(0);
    let s: Vec<usize> = (0..monomials.len()).filter(|&i| monomials[i].degree() == d_max).collect();

    let mut sums: BTreeMap<u32, Poly> = BTreeMap::new();
    for &i in &s {
        let m = &monomials[i];
        let e = sums.entry(m.weight()).or_default();
        *e = &*e + &m.coeff;
    }
    let leading_sums: Vec<LeadingSum> = sums
        .into_iter()
        .map(|(lambda, u)| LeadingSum {
            lambda,
            nonzero: !u.is_zero(),
            b: u.leading().cloned(),
            d: u.degree().map(|d| d as u32),
            u,
        })
        .collect();
    let lambda: Vec<u32> = leading_sums.iter().map(|l| l.lambda).filter(|&l| l > 0).collect();
    let has_zero = leading_sums.iter().any(|l| l.lambda == 0);
    let zero_weight_policy = has_zero.then(|| {
        let u0 = leading_sums.iter().find(|l| l.lambda == 0).is_some_and(|l| l.nonzero);
        format!(
            "weight 0 is not counted in Lambda; u_0 {}",
            if u0 { "is nonzero" } else { "vanishes" }
        )
    });

    let failing: Vec<u32> = leading_sums.iter().filter(|l| !l.nonzero).map(|l| l.lambda).collect();
    let verdict = if s.len() < 2 {
        Verdict::SingletonS
    } else if !failing.is_empty() {
        Verdict::HypothesisFails {
            lambdas: failing,
            reason: "leading sums vanish".into(),
        }
    } else if lambda.is_empty() {
        Verdict::HypothesisFails {
            lambdas: vec![0],
            reason: "all maximal-degree monomials have weight 0".into(),
        }
    } else {
        let max = *lambda.iter().max().expect("nonempty");
        Verdict::Bound {
            bound: BigRational::new(BigInt::from(1), BigInt::from(max)),
        }
    };

    let pairs: Vec<(u32, GaussRat, u32)> = leading_sums
        .iter()
        .filter_map(|l| Some((l.lambda, l.b.clone()?, l.d?)))
        .collect();
    let kappa_candidates = newton_puiseux(&pairs).unwrap_or_default();
    OrderBoundResult {
        s,
        lambda,
        leading_sums,
        verdict,
        kappa_candidates,
        zero_weight_policy,
    }
}

/// Breakpoints `kappa > 0` of the upper envelope of the lines
/// `L_lambda(kappa) = lambda kappa + d_lambda - lambda`, sorted ascending.
///
/// The coefficients `b_lambda` do not enter.
pub fn newton_puiseux(pairs: &[(u32, GaussRat, u32)]) -> Result<Vec<BigRational>, OdeError> {
    let mut lines: BTreeMap<u32, BigRational> = BTreeMap::new();
    for (lambda, _, d) in pairs {
        let c = BigRational::from_integer(BigInt::from(*d as i64 - *lambda as i64));
        lines.entry(*lambda).and_modify(|v| *v = v.clone().max(c.clone())).or_insert(c);
    }
    if lines.len() < 2 {
        return Err(OdeError::InsufficientTerms);
    }
    let lines: Vec<(BigRational, BigRational)> = lines
        .into_iter()
        .map(|(l, c)| (BigRational::from_integer(BigInt::from(l)), c))
        .collect();
    let eval = |(a, c): &(BigRational, BigRational), k: &BigRational| a * k + c;
    let mut out: Vec<BigRational> = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (ai, ci) = &lines[i];
            let (aj, cj) = &lines[j];
            let k = (cj - ci) / (ai - aj);
            if k <= BigRational::zero() || out.contains(&k) {
                continue;
            }
            let v = eval(&lines[i], &k);
            if lines.iter().all(|l| eval(l, &k) <= v) {
                out.push(k);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Equations with a model known to solve them.
pub fn registry() -> Vec<(&'static str, &'static str)> {
    vec![("f' - f", "exp")]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GrowthFit {
    pub slope: f64,
    #[serde(serialize_with = "ser_rational")]
    pub nearest_kappa: BigRational,
    pub deviation: f64,
    pub samples: usize,
}

/// Least-squares slope of `log a` against `log r` over the top decade of the
/// profile, compared with the nearest kappa candidate.
pub fn verify_against_growth(
    monomials: &[DiffMonomial],
    result: &OrderBoundResult,
    profile: &GrowthProfile<'_>,
) -> Result<GrowthFit, OdeError> {
    let (eq, model) = registry()
        .into_iter()
        .find(|(eq, _)| parse_equation(eq).is_ok_and(|m| same_equation(&m, monomials)))
        .ok_or_else(|| OdeError::UnregisteredEquation(describe(monomials)))?;
    let found = profile.tract.model.id();
    if found != model {
        return Err(OdeError::ModelMismatch {
            expected: format!("{model} for {eq}"),
            found: found.to_string(),
        });
    }
    if result.kappa_candidates.is_empty() {
        return Err(OdeError::NoKappaCandidates);
    }
    let r_top = profile.r_max();
    let pts: Vec<(f64, f64)> = profile
        .samples
        .iter()
        .filter(|s| s.r >= r_top / 10.0 * (1.0 - 1e-12))
        .filter_map(|s| s.a.filter(|a| *a > 0.0).map(|a| (s.r.ln(), a.ln())))
        .collect();
    if pts.len() < 3 {
        return Err(OdeError::TooFewSamples);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let (nearest_kappa, deviation) = result
        .kappa_candidates
        .iter()
        .map(|k| (k.clone(), (slope - k.to_f64().unwrap_or(f64::NAN)).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    Ok(GrowthFit {
        slope,
        nearest_kappa,
        deviation,
        samples: pts.len(),
    })
}

fn same_equation(a: &[DiffMonomial], b: &[DiffMonomial]) -> bool {
    a.len() == b.len() && a.iter().all(|m| b.contains(m))
}

fn describe(monomials: &[DiffMonomial]) -> String {
    monomials
        .iter()
        .map(|m| format!("({})*M{:?}", m.coeff, m.t))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Programmatic input: `[{"t": [0, 0, 1], "coeff": ["1"]}, ...]`, with
/// coefficients listed from `z^0` up, each `"p/q"` or `["re", "im"]`.
#[derive(Clone, Debug, Deserialize)]
pub struct MonomialInput {
    pub t: Vec<u32>,
    pub coeff: Vec<CoeffInput>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum CoeffInput {
    Real(String),
    Complex([String; 2]),
}

/// Builds monomials from [`MonomialInput`] JSON.
pub fn monomials_from_json(json: &str) -> Result<Vec<DiffMonomial>, OdeError> {
    let input: Vec<MonomialInput> = serde_json::from_str(json).map_err(|e| OdeError::BadInput(e.to_string()))?;
    let mut terms = Vec::new();
    for m in input {
        if m.t.is_empty() || m.t.len() > MAX_ORDER + 1 {
            return Err(OdeError::BadInput(format!("exponent vector of length {}", m.t.len())));
        }
        let mut coeffs = Vec::new();
        for c in m.coeff {
            let g = match &c {
                CoeffInput::Real(s) => GaussRat::parse_rational(s).map(GaussRat::real),
                CoeffInput::Complex([re, im]) => {
                    GaussRat::parse_rational(re).zip(GaussRat::parse_rational(im)).map(|(a, b)| GaussRat::new(a, b))
                }
            };
            coeffs.push(g.ok_or_else(|| OdeError::BadInput(format!("bad coefficient {c:?}")))?);
        }
        terms.push((m.t, Poly::from_coeffs(coeffs)));
    }
    Ok(parse::from_terms(terms)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::FunctionModel;
    use crate::growth::build_profile;
    use crate::tract::{locate_tract, Window};
    use crate::Complex64;

    fn q(p: i64, r: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(r))
    }

    fn bound_of(eq: &str) -> OrderBoundResult {
        order_bound(&parse_equation(eq).unwrap())
    }

    #[test]
    fn airy_bound_and_kappa() {
        let r = bound_of("f'' - z*f");
        assert_eq!(r.s, vec![0, 1]);
        assert_eq!(r.lambda, vec![2]);
        assert_eq!(r.bound(), Some(&q(1, 2)));
        assert_eq!(r.kappa_candidates, vec![q(3, 2)]);
        assert!(r.zero_weight_policy.is_some());
    }

    #[test]
    fn second_order_linear() {
        let r = bound_of("f'' - f");
        assert_eq!(r.bound(), Some(&q(1, 2)));
        assert_eq!(r.kappa_candidates, vec![q(1, 1)]);
    }

    #[test]
    fn riccati_singleton() {
        assert_eq!(bound_of("f' - f^2").verdict, Verdict::SingletonS);
    }

    #[test]
    fn exponential_equation() {
        let r = bound_of("f' - f");
        assert_eq!(r.bound(), Some(&q(1, 1)));
        assert_eq!(r.kappa_candidates, vec![q(1, 1)]);
    }

    #[test]
    fn vanishing_leading_sum() {
        // both weight-2 members of S cancel in u_2
        let r = bound_of("f*f'' - f'^2 + f");
        assert_eq!(r.s.len(), 2);
        assert!(matches!(r.verdict, Verdict::HypothesisFails { ref lambdas, .. } if lambdas == &vec![2]));
        let r = bound_of("f^2 + z*f^2 - f'");
        assert!(matches!(r.verdict, Verdict::SingletonS));
        let r = bound_of("f^2 + z*f*f");
        assert!(matches!(r.verdict, Verdict::SingletonS));
    }

    #[test]
    fn only_weight_zero() {
        // S = {f^2} after merging, so singleton; with two distinct weight-0
        // members the theorem has no positive weight to use
        let ms = monomials_from_json(r#"[{"t":[2],"coeff":["1"]},{"t":[1],"coeff":["0","1"]}]"#).unwrap();
        assert_eq!(order_bound(&ms).verdict, Verdict::SingletonS);
    }

    #[test]
    fn envelope_examples() {
        let one = GaussRat::one();
        let airy = [(2, one.clone(), 0), (0, one.clone(), 1)];
        assert_eq!(newton_puiseux(&airy).unwrap(), vec![q(3, 2)]);
        let exp = [(1, one.clone(), 0), (0, one.clone(), 0)];
        assert_eq!(newton_puiseux(&exp).unwrap(), vec![q(1, 1)]);
        assert_eq!(newton_puiseux(&[(1, one.clone(), 0)]), Err(OdeError::InsufficientTerms));
        // the middle line lies below the envelope everywhere
        let three = [(0, one.clone(), 0), (1, one.clone(), 0), (2, one.clone(), 0)];
        assert_eq!(newton_puiseux(&three).unwrap(), vec![q(1, 1)]);
    }

    #[test]
    fn json_input_matches_text() {
        let ms = monomials_from_json(r#"[{"t":[0,0,1],"coeff":["1"]},{"t":[1,0,0],"coeff":["0","-1"]}]"#).unwrap();
        assert_eq!(ms, parse_equation("f'' - z*f").unwrap());
        let ms = monomials_from_json(r#"[{"t":[0,1],"coeff":[["0","1"]]},{"t":[1],"coeff":["-1/2"]}]"#).unwrap();
        assert_eq!(ms, parse_equation("i*f' - f/2").unwrap());
        assert!(monomials_from_json(r#"[{"t":[1],"coeff":["x"]}]"#).is_err());
    }

    #[test]
    fn exp_profile_slope() {
        let m = FunctionModel::parse("exp").unwrap();
        let t = locate_tract(&m, 1.0, Complex64::new(1.0, 0.0), Window::new(-5.0, 5.0, -5.0, 5.0, 100, 100).unwrap())
            .unwrap();
        let p = build_profile(&t, 10.0, 100.0).unwrap();
        let ms = parse_equation("f' - f").unwrap();
        let r = order_bound(&ms);
        let fit = verify_against_growth(&ms, &r, &p).unwrap();
        let swapped = parse_equation("-f + f'").unwrap();
        assert!(verify_against_growth(&swapped, &order_bound(&swapped), &p).is_ok());
        assert!((fit.slope - 1.0).abs() <= 0.02, "{fit:?}");
        assert_eq!(fit.nearest_kappa, q(1, 1));
        let airy = parse_equation("f'' - z*f").unwrap();
        assert!(matches!(
            verify_against_growth(&airy, &order_bound(&airy), &p),
            Err(OdeError::UnregisteredEquation(_))
        ));
    }
}
