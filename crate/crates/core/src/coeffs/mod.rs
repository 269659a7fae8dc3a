//! Periodic coefficient triples `(w, p, q)` given as piecewise forms on one
//! period cell `[0, a)`, with structural checks for turning points of `w`.

pub(crate) mod poly;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};

/// Relative tolerance used to compare breakpoints and anchors.
const POS_TOL: f64 = 1e-12;
/// Samples per segment for structural sign and positivity checks.
const CHECK_SAMPLES: usize = 256;

/// `rho(x - anchor) * |x - anchor|^tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerForm {
    /// Ascending coefficients in the coordinate `x - anchor`.
    pub rho: Vec<f64>,
    pub tau: f64,
    pub anchor: f64,
}

impl PowerForm {
    fn rho_at(&self, x: f64) -> f64 {
        poly::eval(&self.rho, x - self.anchor)
    }

    /// True unless `tau` is a nonnegative integer, i.e. the form may have
    /// unbounded derivatives at the anchor.
    pub fn is_singular(&self) -> bool {
        !(self.tau >= 0.0 && self.tau.fract() == 0.0)
    }
}

/// One coefficient on one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SegmentForm {
    #[serde(rename = "const")]
    Constant(f64),
    /// Ascending coefficients in the local coordinate `x - x_lo`.
    #[serde(rename = "poly")]
    Polynomial(Vec<f64>),
    #[serde(rename = "power")]
    PowerWeighted(PowerForm),
}

impl SegmentForm {
    pub fn eval(&self, x: f64, x_lo: f64) -> f64 {
        match self {
            SegmentForm::Constant(c) => *c,
            SegmentForm::Polynomial(c) => poly::eval(c, x - x_lo),
            SegmentForm::PowerWeighted(f) => {
                let r = (x - f.anchor).abs();
                if r == 0.0 {
                    match f.tau.partial_cmp(&0.0) {
                        Some(std::cmp::Ordering::Greater) => 0.0,
                        Some(std::cmp::Ordering::Equal) => f.rho_at(x),
                        _ => f64::INFINITY * f.rho_at(x).signum(),
                    }
                } else {
                    f.rho_at(x) * r.powf(f.tau)
                }
            }
        }
    }

    fn is_identically_zero(&self) -> bool {
        match self {
            SegmentForm::Constant(c) => *c == 0.0,
            SegmentForm::Polynomial(c) => poly::is_zero(c),
            SegmentForm::PowerWeighted(f) => poly::is_zero(&f.rho),
        }
    }

    fn negated(&self) -> SegmentForm {
        match self {
            SegmentForm::Constant(c) => SegmentForm::Constant(-c),
            SegmentForm::Polynomial(c) => SegmentForm::Polynomial(c.iter().map(|a| -a).collect()),
            SegmentForm::PowerWeighted(f) => SegmentForm::PowerWeighted(PowerForm {
                rho: f.rho.iter().map(|a| -a).collect(),
                ..f.clone()
            }),
        }
    }

    fn numbers_finite(&self) -> bool {
        match self {
            SegmentForm::Constant(c) => c.is_finite(),
            SegmentForm::Polynomial(c) => !c.is_empty() && c.iter().all(|a| a.is_finite()),
            SegmentForm::PowerWeighted(f) => {
                !f.rho.is_empty()
                    && f.rho.iter().all(|a| a.is_finite())
                    && f.tau.is_finite()
                    && f.anchor.is_finite()
            }
        }
    }

    /// Interior points where the form may take its extreme values: zeros of
    /// the derivative of the polynomial part.
    fn extremum_candidates(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            SegmentForm::Constant(_) => Vec::new(),
            SegmentForm::Polynomial(c) => poly::critical_points(c, 0.0, hi - lo)
                .into_iter()
                .map(|s| s + lo)
                .collect(),
            SegmentForm::PowerWeighted(f) => {
                let (a, b) = (lo - f.anchor, hi - f.anchor);
                let mut pts: Vec<f64> = poly::critical_points(&f.rho, a, b)
                    .into_iter()
                    .map(|s| s + f.anchor)
                    .collect();
                pts.extend(poly::zeros_in(&f.rho, a, b, 64).into_iter().map(|s| s + f.anchor));
                pts
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    #[serde(rename = "lo")]
    pub x_lo: f64,
    #[serde(rename = "hi")]
    pub x_hi: f64,
    #[serde(rename = "w")]
    pub w_form: SegmentForm,
    #[serde(rename = "p")]
    pub p_form: SegmentForm,
    #[serde(rename = "q")]
    pub q_form: SegmentForm,
}

impl Segment {
    pub fn new(x_lo: f64, x_hi: f64, w: SegmentForm, p: SegmentForm, q: SegmentForm) -> Self {
        Segment {
            x_lo,
            x_hi,
            w_form: w,
            p_form: p,
            q_form: q,
        }
    }

    pub fn w(&self, x: f64) -> f64 {
        self.w_form.eval(x, self.x_lo)
    }

    pub fn p(&self, x: f64) -> f64 {
        self.p_form.eval(x, self.x_lo)
    }

    pub fn q(&self, x: f64) -> f64 {
        self.q_form.eval(x, self.x_lo)
    }

    pub fn len(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    /// All three coefficients are `Constant`, so the exact propagator applies.
    pub fn is_constant(&self) -> bool {
        matches!(
            (&self.w_form, &self.p_form, &self.q_form),
            (
                SegmentForm::Constant(_),
                SegmentForm::Constant(_),
                SegmentForm::Constant(_)
            )
        )
    }

    fn forms(&self) -> [&SegmentForm; 3] {
        [&self.w_form, &self.p_form, &self.q_form]
    }

    fn interior_samples(&self) -> impl Iterator<Item = f64> + '_ {
        let n = CHECK_SAMPLES;
        (1..n).map(move |k| self.x_lo + self.len() * k as f64 / n as f64)
    }

    fn shifted(&self, dx: f64) -> Segment {
        let shift_form = |f: &SegmentForm| match f {
            SegmentForm::PowerWeighted(pf) => SegmentForm::PowerWeighted(PowerForm {
                anchor: pf.anchor + dx,
                ..pf.clone()
            }),
            other => other.clone(),
        };
        Segment {
            x_lo: self.x_lo + dx,
            x_hi: self.x_hi + dx,
            w_form: shift_form(&self.w_form),
            p_form: shift_form(&self.p_form),
            q_form: shift_form(&self.q_form),
        }
    }
}

/// The periodic triple `(w, p, q)` with period `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSet {
    #[serde(rename = "period")]
    pub period_a: f64,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    NonPositivePeriod,
    Coverage,
    EmptySegment,
    NonFinite,
    PNotPositive,
    WIdenticallyZero,
    NotIntegrable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub segment: Option<usize>,
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, segment: Option<usize>, kind: ViolationKind, message: impl Into<String>) {
        self.violations.push(Violation {
            segment,
            kind,
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| match v.segment {
                Some(i) => format!("segment {i}: {}", v.message),
                None => v.message.clone(),
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightSign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurningPointReport {
    pub location: f64,
    pub is_one_simple: bool,
    pub tau_plus: Option<f64>,
    pub tau_minus: Option<f64>,
    /// `p` and `1/p` essentially bounded on both sides of the turning point.
    pub p_bounded_near: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfinityCondition {
    pub holds: bool,
    pub witnesses: Vec<TurningPointReport>,
}

impl CoefficientSet {
    pub fn new(period_a: f64, segments: Vec<Segment>) -> Self {
        CoefficientSet { period_a, segments }
    }

    /// Hill-type set: `w = p = 1`, constant `q`, one segment.
    pub fn hill(period_a: f64, q: f64) -> Self {
        use SegmentForm::Constant;
        CoefficientSet::new(
            period_a,
            vec![Segment::new(0.0, period_a, Constant(1.0), Constant(1.0), Constant(q))],
        )
    }

    /// Indefinite square well: period 2, `w = +1` on `[0, 1)`, `w = -1` on
    /// `[1, 2)`, `p = 1`, constant `q`.
    pub fn square_well(q: f64) -> Self {
        use SegmentForm::Constant;
        CoefficientSet::new(
            2.0,
            vec![
                Segment::new(0.0, 1.0, Constant(1.0), Constant(1.0), Constant(q)),
                Segment::new(1.0, 2.0, Constant(-1.0), Constant(1.0), Constant(q)),
            ],
        )
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(s);
        serde_path_to_error::deserialize(de).map_err(|e| FloquetError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("coefficient sets always serialize")
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.segments.iter().map(|s| s.x_lo).collect();
        if let Some(last) = self.segments.last() {
            b.push(last.x_hi);
        }
        b
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.segments.iter().all(Segment::is_constant)
    }

    /// Index of the segment containing `x` (clamped to the cell).
    pub fn segment_index(&self, x: f64) -> usize {
        self.segments
            .iter()
            .position(|s| x < s.x_hi)
            .unwrap_or(self.segments.len() - 1)
    }

    pub fn validate(&self) -> ValidationReport {
        use ViolationKind::*;
        let mut rep = ValidationReport::default();
        let a = self.period_a;
        if !(a.is_finite() && a > 0.0) {
            rep.push(None, NonPositivePeriod, "period must be a positive finite number");
        }
        if self.segments.is_empty() {
            rep.push(None, Coverage, "no segments");
            return rep;
        }
        let tol = POS_TOL * a.abs().max(1.0);
        if (self.segments[0].x_lo).abs() > tol {
            rep.push(Some(0), Coverage, "first segment must start at 0");
        }
        for (i, pair) in self.segments.windows(2).enumerate() {
            if (pair[0].x_hi - pair[1].x_lo).abs() > tol {
                rep.push(Some(i + 1), Coverage, "segments leave a gap or overlap");
            }
        }
        let last = self.segments.len() - 1;
        if (self.segments[last].x_hi - a).abs() > tol {
            rep.push(Some(last), Coverage, "last segment must end at the period");
        }

        for (i, seg) in self.segments.iter().enumerate() {
            if !(seg.x_lo.is_finite() && seg.x_hi.is_finite()) || seg.forms().iter().any(|f| !f.numbers_finite()) {
                rep.push(Some(i), NonFinite, "non-finite or empty coefficient data");
                continue;
            }
            if seg.x_lo >= seg.x_hi {
                rep.push(Some(i), EmptySegment, "x_lo must be smaller than x_hi");
                continue;
            }
            for (name, form) in [("w", &seg.w_form), ("p", &seg.p_form), ("q", &seg.q_form)] {
                if let SegmentForm::PowerWeighted(f) = form {
                    if f.tau <= -1.0 {
                        rep.push(Some(i), NotIntegrable, format!("{name}: power exponent must exceed -1"));
                    }
                    if name == "p" && f.tau >= 1.0 {
                        rep.push(Some(i), NotIntegrable, "p: 1/p is not integrable for exponent >= 1");
                    }
                }
            }
            if seg.w_form.is_identically_zero() {
                rep.push(Some(i), WIdenticallyZero, "w identically zero");
            }
            if !self.p_positive(seg) {
                rep.push(Some(i), PNotPositive, "p not positive");
            }
            let anchors: Vec<f64> = seg
                .forms()
                .iter()
                .filter_map(|f| match f {
                    SegmentForm::PowerWeighted(pf) => Some(pf.anchor),
                    _ => None,
                })
                .collect();
            let finite = seg
                .interior_samples()
                .filter(|x| !anchors.contains(x))
                .all(|x| seg.w(x).is_finite() && seg.q(x).is_finite() && seg.p(x).is_finite());
            if !finite {
                rep.push(Some(i), NonFinite, "coefficient not finite at an interior sample");
            }
        }
        rep
    }

    fn p_positive(&self, seg: &Segment) -> bool {
        let anchor = match &seg.p_form {
            SegmentForm::PowerWeighted(f) => Some(f.anchor),
            _ => None,
        };
        let mut pts: Vec<f64> = vec![seg.x_lo, seg.x_hi];
        pts.extend(seg.interior_samples());
        pts.extend(seg.p_form.extremum_candidates(seg.x_lo, seg.x_hi));
        pts.into_iter()
            .filter(|&x| anchor.map_or(true, |a| x != a))
            .all(|x| seg.p(x) > 0.0)
    }

    /// Sign of `w` on the interior of segment `i`.
    pub fn weight_sign(&self, i: usize) -> Result<WeightSign> {
        let seg = &self.segments[i];
        let mut pts: Vec<f64> = seg.interior_samples().collect();
        pts.extend(
            seg.w_form
                .extremum_candidates(seg.x_lo, seg.x_hi)
                .into_iter()
                .filter(|&x| x > seg.x_lo && x < seg.x_hi),
        );
        let (mut pos, mut neg) = (false, false);
        for x in pts {
            let v = seg.w(x);
            pos |= v > 0.0;
            neg |= v < 0.0;
        }
        match (pos, neg) {
            (true, false) => Ok(WeightSign::Positive),
            (false, true) => Ok(WeightSign::Negative),
            _ => Err(FloquetError::UnresolvableSign { segment: i }),
        }
    }

    pub fn weight_signs(&self) -> Result<Vec<WeightSign>> {
        (0..self.segments.len()).map(|i| self.weight_sign(i)).collect()
    }

    pub fn is_indefinite(&self) -> Result<bool> {
        let s = self.weight_signs()?;
        Ok(s.iter().any(|&x| x != s[0]))
    }

    /// The definite companion: `w` replaced by `|w|`.
    pub fn abs_weight(&self) -> Result<CoefficientSet> {
        let signs = self.weight_signs()?;
        let segments = self
            .segments
            .iter()
            .zip(signs)
            .map(|(seg, s)| {
                let mut seg = seg.clone();
                if s == WeightSign::Negative {
                    seg.w_form = seg.w_form.negated();
                }
                seg
            })
            .collect();
        Ok(CoefficientSet::new(self.period_a, segments))
    }

    pub fn turning_points(&self) -> Result<Vec<TurningPointReport>> {
        let signs = self.weight_signs()?;
        let n = self.segments.len();
        let a = self.period_a;
        let mut out = Vec::new();
        for right in 0..n {
            let left = if right == 0 { n - 1 } else { right - 1 };
            if signs[left] == signs[right] {
                continue;
            }
            let (ls, rs) = (&self.segments[left], &self.segments[right]);
            // the wrap-around point is seen as x = a from the left and x = 0 from the right
            let (x_left, x_right) = (ls.x_hi, rs.x_lo);
            let (tau_minus, rho_minus) = side_profile(&ls.w_form, ls, x_left, a);
            let (tau_plus, rho_plus) = side_profile(&rs.w_form, rs, x_right, a);
            let is_one_simple = rho_minus != 0.0 && rho_plus != 0.0 && tau_minus > -1.0 && tau_plus > -1.0;
            let p_bounded_near = p_bounded(&ls.p_form, ls, x_left, a) && p_bounded(&rs.p_form, rs, x_right, a);
            out.push(TurningPointReport {
                location: if right == 0 { 0.0 } else { x_right },
                is_one_simple,
                tau_plus: Some(tau_plus),
                tau_minus: Some(tau_minus),
                p_bounded_near,
            });
        }
        out.sort_by(|x, y| x.location.total_cmp(&y.location));
        Ok(out)
    }

    pub fn infinity_condition(&self) -> Result<InfinityCondition> {
        let witnesses: Vec<TurningPointReport> = self
            .turning_points()?
            .into_iter()
            .filter(|r| !(r.is_one_simple && r.p_bounded_near))
            .collect();
        Ok(InfinityCondition {
            holds: witnesses.is_empty(),
            witnesses,
        })
    }

    /// The mirror image `x -> a - x` of the cell.
    pub fn reflect(&self) -> CoefficientSet {
        let a = self.period_a;
        let odd_negated = |c: Vec<f64>| -> Vec<f64> {
            c.into_iter().enumerate().map(|(k, v)| if k % 2 == 1 { -v } else { v }).collect()
        };
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| {
                let len = s.len();
                let mirror = |f: &SegmentForm| match f {
                    SegmentForm::Constant(c) => SegmentForm::Constant(*c),
                    // local coordinate s' = len - s
                    SegmentForm::Polynomial(c) => SegmentForm::Polynomial(odd_negated(poly::taylor_shift(c, len))),
                    SegmentForm::PowerWeighted(pf) => SegmentForm::PowerWeighted(PowerForm {
                        rho: odd_negated(pf.rho.clone()),
                        tau: pf.tau,
                        anchor: a - pf.anchor,
                    }),
                };
                Segment::new(a - s.x_hi, a - s.x_lo, mirror(&s.w_form), mirror(&s.p_form), mirror(&s.q_form))
            })
            .collect();
        CoefficientSet::new(a, segments)
    }

    /// Rotates the period cell so that it starts at the breakpoint `offset`.
    pub fn rotate(&self, offset: f64) -> Result<CoefficientSet> {
        let a = self.period_a;
        let tol = POS_TOL * a.max(1.0);
        let k = self
            .segments
            .iter()
            .position(|s| (s.x_lo - offset).abs() <= tol)
            .ok_or_else(|| FloquetError::InvalidInput(format!("{offset} is not a breakpoint")))?;
        let mut segments: Vec<Segment> = self.segments[k..].iter().map(|s| s.shifted(-offset)).collect();
        segments.extend(self.segments[..k].iter().map(|s| s.shifted(a - offset)));
        Ok(CoefficientSet::new(a, segments))
    }

    /// Splits segment `i` at `x_mid` into two segments carrying the same
    /// coefficient functions.
    pub fn split(&self, i: usize, x_mid: f64) -> Result<CoefficientSet> {
        let seg = self
            .segments
            .get(i)
            .ok_or_else(|| FloquetError::InvalidInput(format!("no segment {i}")))?;
        if !(x_mid > seg.x_lo && x_mid < seg.x_hi) {
            return Err(FloquetError::InvalidInput(format!("{x_mid} is not inside segment {i}")));
        }
        let reexpand = |f: &SegmentForm| match f {
            SegmentForm::Polynomial(c) => SegmentForm::Polynomial(poly::taylor_shift(c, x_mid - seg.x_lo)),
            other => other.clone(),
        };
        let mut left = seg.clone();
        left.x_hi = x_mid;
        let right = Segment {
            x_lo: x_mid,
            x_hi: seg.x_hi,
            w_form: reexpand(&seg.w_form),
            p_form: reexpand(&seg.p_form),
            q_form: reexpand(&seg.q_form),
        };
        let mut segments = self.segments.clone();
        segments.splice(i..=i, [left, right]);
        Ok(CoefficientSet::new(self.period_a, segments))
    }
}

/// Declared `(tau, rho(x0))` of the weight form on one side of `x0`.
fn side_profile(form: &SegmentForm, seg: &Segment, x0: f64, a: f64) -> (f64, f64) {
    match form {
        SegmentForm::PowerWeighted(f) if (f.anchor - x0).abs() <= POS_TOL * a.max(1.0) => {
            (f.tau, poly::eval(&f.rho, 0.0))
        }
        // a polynomial vanishing to order k at x0 is |x - x0|^k times a nonvanishing factor
        SegmentForm::Polynomial(c) => {
            let shifted = poly::taylor_shift(c, x0 - seg.x_lo);
            let scale = shifted.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let sign = if x0 > seg.x_lo { -1.0f64 } else { 1.0 };
            shifted
                .iter()
                .enumerate()
                .find(|(_, v)| v.abs() > 1e-12 * scale)
                .map(|(k, v)| (k as f64, v * sign.powi(k as i32)))
                .unwrap_or((0.0, 0.0))
        }
        other => (0.0, other.eval(x0, seg.x_lo)),
    }
}

fn p_bounded(form: &SegmentForm, seg: &Segment, x0: f64, a: f64) -> bool {
    match form {
        SegmentForm::PowerWeighted(f) if (f.anchor - x0).abs() <= POS_TOL * a.max(1.0) => {
            // bounded iff tau >= 0, 1/p bounded iff tau <= 0
            f.tau == 0.0 && poly::eval(&f.rho, 0.0) > 0.0
        }
        other => {
            let v = other.eval(x0, seg.x_lo);
            v.is_finite() && v > 0.0
        }
    }
}
