//! The closed catalog of generator maps.
//!
//! Five parameterized families cover every semigroup this crate works with:
//!
//! | grammar  | map                         |
//! |----------|-----------------------------|
//! | `power`  | `z^d / b`                   |
//! | `tcheb`  | Tchebyshev `T_n(z)`         |
//! | `exp`    | `exp(gamma z + c)`          |
//! | `affexp` | `z + gamma exp(z) + c`      |
//! | `sine`   | `s (z + gamma sin z) + c`   |
//!
//! Evaluation never fails: once any component of a result leaves
//! `[-1e150, 1e150]` (or is not finite) the result is the overflow sentinel.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sample::SampleSpec;

/// Points of the plane.
pub type ComplexPoint = Complex64;

/// Magnitude bound on each component; anything beyond collapses to
/// [`OVERFLOW`].
pub const OVERFLOW_GUARD: f64 = 1e150;

/// The overflow sentinel. Its components are infinite, so it compares unequal
/// to every finite point and fails `is_finite`.
pub const OVERFLOW: ComplexPoint = Complex64::new(f64::INFINITY, f64::INFINITY);

/// Largest real part `exp` accepts before the guard trips.
const EXP_RE_LIMIT: f64 = 709.0;

#[inline]
pub fn is_overflow(z: ComplexPoint) -> bool {
    !(z.re.abs() <= OVERFLOW_GUARD && z.im.abs() <= OVERFLOW_GUARD)
}

#[inline]
pub fn guard(z: ComplexPoint) -> ComplexPoint {
    if is_overflow(z) {
        OVERFLOW
    } else {
        z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapKind {
    /// `z^degree / divisor`
    PowerQuotient { degree: u32, divisor: ComplexPoint },
    /// `T_degree(z)`
    Tchebyshev { degree: u32 },
    /// `exp(gamma z + shift)`
    ExpAffine { gamma: ComplexPoint, shift: ComplexPoint },
    /// `z + gamma exp(z) + shift`
    AffineExp { gamma: ComplexPoint, shift: ComplexPoint },
    /// `sign (z + gamma sin z) + shift`
    SineAffine {
        gamma: ComplexPoint,
        shift: ComplexPoint,
        sign: Sign,
    },
}

/// One catalog map. Construct through the checked constructors or
/// [`parse_map`]; the parameter constraints hold for every value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapDescriptor {
    kind: MapKind,
    // 1 / divisor for PowerQuotient, unused otherwise
    recip: ComplexPoint,
}

fn nonzero(name: &str, v: ComplexPoint) -> Result<()> {
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::invalid(format!("{name} must be finite")));
    }
    if v.re == 0.0 && v.im == 0.0 {
        return Err(Error::invalid(format!("{name} must be nonzero")));
    }
    Ok(())
}

fn finite(name: &str, v: ComplexPoint) -> Result<()> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite")))
    }
}

impl MapDescriptor {
    pub fn power(degree: u32, divisor: ComplexPoint) -> Result<Self> {
        if degree < 2 {
            return Err(Error::invalid(format!("power degree {degree} < 2")));
        }
        nonzero("power divisor b", divisor)?;
        Ok(MapDescriptor {
            kind: MapKind::PowerQuotient { degree, divisor },
            recip: divisor.inv(),
        })
    }

    pub fn tchebyshev(degree: u32) -> Result<Self> {
        if degree < 2 {
            return Err(Error::invalid(format!("Tchebyshev degree {degree} < 2")));
        }
        Ok(Self::plain(MapKind::Tchebyshev { degree }))
    }

    pub fn exp_affine(gamma: ComplexPoint, shift: ComplexPoint) -> Result<Self> {
        nonzero("exp gamma", gamma)?;
        finite("exp c", shift)?;
        Ok(Self::plain(MapKind::ExpAffine { gamma, shift }))
    }

    pub fn affine_exp(gamma: ComplexPoint, shift: ComplexPoint) -> Result<Self> {
        nonzero("affexp gamma", gamma)?;
        finite("affexp c", shift)?;
        Ok(Self::plain(MapKind::AffineExp { gamma, shift }))
    }

    pub fn sine_affine(gamma: ComplexPoint, shift: ComplexPoint, sign: Sign) -> Result<Self> {
        nonzero("sine gamma", gamma)?;
        finite("sine c", shift)?;
        Ok(Self::plain(MapKind::SineAffine { gamma, shift, sign }))
    }

    fn plain(kind: MapKind) -> Self {
        MapDescriptor {
            kind,
            recip: Complex64::new(1.0, 0.0),
        }
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            MapKind::PowerQuotient { .. } => "power",
            MapKind::Tchebyshev { .. } => "tcheb",
            MapKind::ExpAffine { .. } => "exp",
            MapKind::AffineExp { .. } => "affexp",
            MapKind::SineAffine { .. } => "sine",
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(
            self.kind,
            MapKind::PowerQuotient { .. } | MapKind::Tchebyshev { .. }
        )
    }

    /// Every catalog map is entire (the rational ones are polynomials).
    pub fn is_entire(&self) -> bool {
        true
    }

    /// Catalog metadata: whether the singular-value set is known to be
    /// finite. Not computed, only recorded.
    pub fn finite_type_claimed(&self) -> bool {
        matches!(
            self.kind,
            MapKind::PowerQuotient { .. } | MapKind::Tchebyshev { .. } | MapKind::ExpAffine { .. }
        )
    }

    #[inline]
    pub fn eval(&self, z: ComplexPoint) -> ComplexPoint {
        match self.kind {
            MapKind::PowerQuotient { degree, .. } => guard(powu(z, degree) * self.recip),
            MapKind::Tchebyshev { degree } => guard(tchebyshev_eval(degree, z)),
            MapKind::ExpAffine { gamma, shift } => {
                let w = gamma * z + shift;
                if w.re > EXP_RE_LIMIT {
                    OVERFLOW
                } else {
                    guard(w.exp())
                }
            }
            MapKind::AffineExp { gamma, shift } => {
                if z.re > EXP_RE_LIMIT {
                    OVERFLOW
                } else {
                    guard(z + gamma * z.exp() + shift)
                }
            }
            MapKind::SineAffine { gamma, shift, sign } => {
                if z.im.abs() > EXP_RE_LIMIT {
                    OVERFLOW
                } else {
                    guard((z + gamma * z.sin()) * sign.as_f64() + shift)
                }
            }
        }
    }

    /// Textual form accepted by [`parse_map`].
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for MapDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MapKind::PowerQuotient { degree, divisor } => {
                write!(f, "power d={} b={}", degree, render_complex(divisor))
            }
            MapKind::Tchebyshev { degree } => write!(f, "tcheb n={degree}"),
            MapKind::ExpAffine { gamma, shift } => write!(
                f,
                "exp gamma={} c={}",
                render_complex(gamma),
                render_complex(shift)
            ),
            MapKind::AffineExp { gamma, shift } => write!(
                f,
                "affexp gamma={} c={}",
                render_complex(gamma),
                render_complex(shift)
            ),
            MapKind::SineAffine { gamma, shift, sign } => write!(
                f,
                "sine gamma={} c={} s={}",
                render_complex(gamma),
                render_complex(shift),
                match sign {
                    Sign::Plus => "+",
                    Sign::Minus => "-",
                }
            ),
        }
    }
}

pub fn eval_map(m: &MapDescriptor, z: ComplexPoint) -> ComplexPoint {
    m.eval(z)
}

#[inline]
fn powu(z: ComplexPoint, d: u32) -> ComplexPoint {
    match d {
        2 => z * z,
        3 => z * z * z,
        _ => {
            let mut base = z;
            let mut e = d;
            let mut acc = Complex64::new(1.0, 0.0);
            while e > 0 {
                if e & 1 == 1 {
                    acc *= base;
                }
                base *= base;
                e >>= 1;
            }
            acc
        }
    }
}

/// `T_n(z)` by the three-term recurrence `T_{k+1} = 2z T_k - T_{k-1}`.
pub fn tchebyshev_eval(n: u32, z: ComplexPoint) -> ComplexPoint {
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let two_z = z + z;
    let mut prev = Complex64::new(1.0, 0.0);
    let mut cur = z;
    for _ in 1..n {
        let next = two_z * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Coefficients of `T_n`, lowest degree first.
pub fn tchebyshev_coeffs(n: u32) -> Vec<f64> {
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for _ in 1..n {
        let mut next = vec![0.0; cur.len() + 1];
        for (k, c) in cur.iter().enumerate() {
            next[k + 1] += 2.0 * c;
        }
        for (k, c) in prev.iter().enumerate() {
            next[k] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// All `d` solutions of `z^d / b = w`, i.e. the d-th roots of `b w`, in order
/// of increasing argument offset from the principal root.
pub fn inverse_branches(m: &MapDescriptor, w: ComplexPoint) -> Result<Vec<ComplexPoint>> {
    let (degree, divisor) = match m.kind {
        MapKind::PowerQuotient { degree, divisor } => (degree, divisor),
        _ => return Err(Error::UnsupportedMap(m.kind_name())),
    };
    if w.re == 0.0 && w.im == 0.0 {
        return Err(Error::ZeroArgument);
    }
    let p = divisor * w;
    let d = degree as f64;
    let r = p.norm().powf(1.0 / d);
    let theta = p.arg();
    Ok((0..degree)
        .map(|k| Complex64::from_polar(r, (theta + std::f64::consts::TAU * k as f64) / d))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorDefect {
    /// max |f(g(z)) - g(f(z))| / (1 + max(|f(g(z))|, |g(f(z))|))
    pub defect: f64,
    pub skipped: usize,
    pub evaluated: usize,
}

/// Numerical commutator test over a seeded point sample. The normalization
/// uses the larger of the two composition magnitudes, which makes the result
/// symmetric in `f` and `g` bit for bit.
pub fn commutator_defect(
    f: &MapDescriptor,
    g: &MapDescriptor,
    sample: &SampleSpec,
) -> Result<CommutatorDefect> {
    let points = sample.points()?;
    let mut defect = 0.0f64;
    let mut skipped = 0;
    for z in &points {
        let fg = f.eval(g.eval(*z));
        let gf = g.eval(f.eval(*z));
        if is_overflow(fg) || is_overflow(gf) || is_overflow(f.eval(*z)) || is_overflow(g.eval(*z))
        {
            skipped += 1;
            continue;
        }
        let scale = 1.0 + fg.norm().max(gf.norm());
        defect = defect.max((fg - gf).norm() / scale);
    }
    if skipped == points.len() {
        return Err(Error::AllSamplesOverflowed(skipped));
    }
    Ok(CommutatorDefect {
        defect,
        skipped,
        evaluated: points.len() - skipped,
    })
}

/// Known singular-value facts for a catalog map. Documentation only.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularValueNote {
    pub map: MapDescriptor,
    pub note: &'static str,
}

pub fn singular_value_note(m: &MapDescriptor) -> SingularValueNote {
    let note = match m.kind {
        MapKind::PowerQuotient { .. } => {
            "polynomial; only finite critical value is 0, no asymptotic values (finite type)"
        }
        MapKind::Tchebyshev { .. } => {
            "polynomial; finite critical values are +1 and -1, Julia set is [-1, 1] (finite type)"
        }
        MapKind::ExpAffine { .. } => {
            "no critical values; single asymptotic value 0 (finite type, Speiser class)"
        }
        MapKind::AffineExp { .. } => {
            "critical points where exp(z) = -1/gamma; critical values are unbounded (not bounded type)"
        }
        MapKind::SineAffine { .. } => {
            "critical points where cos z = -1/gamma; critical values differ by multiples of 2 pi (not bounded type)"
        }
    };
    SingularValueNote { map: *m, note }
}

// ---------------------------------------------------------------------------
// textual form

pub(crate) fn render_real(v: f64) -> String {
    format!("{v:?}")
}

pub fn render_complex(z: ComplexPoint) -> String {
    if z.im == 0.0 && z.im.is_sign_positive() {
        render_real(z.re)
    } else if z.im.is_sign_negative() {
        format!("{}{}i", render_real(z.re), render_real(z.im))
    } else {
        format!("{}+{}i", render_real(z.re), render_real(z.im))
    }
}

fn parse_real(text: &str, at: usize) -> Result<f64> {
    let ok = !text.is_empty()
        && text
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-'));
    match text.parse::<f64>() {
        Ok(v) if ok && v.is_finite() => Ok(v),
        _ => Err(Error::parse(at, format!("expected a decimal number, found `{text}`"))),
    }
}

/// Parses `a`, `a+bi` or `a-bi`. `at` is the byte offset of `text` in the
/// enclosing input, used for error positions.
pub fn parse_complex_at(text: &str, at: usize) -> Result<ComplexPoint> {
    let Some(body) = text.strip_suffix('i') else {
        return Ok(Complex64::new(parse_real(text, at)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let Some(k) = split else {
        return Err(Error::parse(
            at,
            format!("expected `a`, `a+bi` or `a-bi`, found `{text}`"),
        ));
    };
    let re = parse_real(&body[..k], at)?;
    let im_text = &body[k..];
    let im = parse_real(im_text.strip_prefix('+').unwrap_or(im_text), at + k)?;
    Ok(Complex64::new(re, im))
}

pub fn parse_complex(text: &str) -> Result<ComplexPoint> {
    parse_complex_at(text, 0)
}

struct Fields<'a> {
    kind_end: usize,
    // (key, value, offset of value)
    pairs: Vec<(&'a str, &'a str, usize)>,
    end: usize,
}

impl<'a> Fields<'a> {
    fn take(&mut self, key: &str, expected: &str) -> Result<(&'a str, usize)> {
        match self.pairs.iter().position(|(k, _, _)| *k == key) {
            Some(p) => {
                let (_, v, at) = self.pairs.remove(p);
                Ok((v, at))
            }
            None => Err(Error::parse(
                self.end.max(self.kind_end),
                format!("expected `{key}={expected}`"),
            )),
        }
    }

    fn finish(self) -> Result<()> {
        match self.pairs.first() {
            None => Ok(()),
            Some((k, _, at)) => Err(Error::parse(
                at - k.len() - 1,
                format!("unexpected key `{k}`"),
            )),
        }
    }
}

fn parse_u32(text: &str, at: usize) -> Result<u32> {
    text.parse::<u32>()
        .map_err(|_| Error::parse(at, format!("expected an integer, found `{text}`")))
}

/// Parses one map in the catalog grammar:
///
/// ```text
/// power d=<int> b=<complex>
/// tcheb n=<int>
/// exp gamma=<complex> c=<complex>
/// affexp gamma=<complex> c=<complex>
/// sine gamma=<complex> c=<complex> s=<+|->
/// ```
pub fn parse_map(spec: &str) -> Result<MapDescriptor> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (k, ch) in spec.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(k),
            (true, Some(s)) => {
                tokens.push((s, &spec[s..k]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push((s, &spec[s..]));
    }
    let Some(&(kind_at, kind)) = tokens.first() else {
        return Err(Error::parse(0, "expected a map kind (power, tcheb, exp, affexp, sine)"));
    };
    let mut pairs = Vec::new();
    for &(at, tok) in &tokens[1..] {
        let Some(eq) = tok.find('=') else {
            return Err(Error::parse(at, format!("expected `key=value`, found `{tok}`")));
        };
        let key = &tok[..eq];
        if pairs.iter().any(|(k, _, _)| *k == key) {
            return Err(Error::parse(at, format!("duplicate key `{key}`")));
        }
        pairs.push((key, &tok[eq + 1..], at + eq + 1));
    }
    let mut fields = Fields {
        kind_end: kind_at + kind.len(),
        pairs,
        end: spec.trim_end().len(),
    };
    let map = match kind {
        "power" => {
            let (d, d_at) = fields.take("d", "<int>")?;
            let (b, b_at) = fields.take("b", "<complex>")?;
            let d = parse_u32(d, d_at)?;
            let b = parse_complex_at(b, b_at)?;
            fields.finish()?;
            MapDescriptor::power(d, b).map_err(|e| Error::parse(d_at, e.to_string()))?
        }
        "tcheb" => {
            let (n, n_at) = fields.take("n", "<int>")?;
            let n = parse_u32(n, n_at)?;
            fields.finish()?;
            MapDescriptor::tchebyshev(n).map_err(|e| Error::parse(n_at, e.to_string()))?
        }
        "exp" | "affexp" | "sine" => {
            let (g, g_at) = fields.take("gamma", "<complex>")?;
            let (c, c_at) = fields.take("c", "<complex>")?;
            let gamma = parse_complex_at(g, g_at)?;
            let shift = parse_complex_at(c, c_at)?;
            let built = match kind {
                "exp" => {
                    fields.finish()?;
                    MapDescriptor::exp_affine(gamma, shift)
                }
                "affexp" => {
                    fields.finish()?;
                    MapDescriptor::affine_exp(gamma, shift)
                }
                _ => {
                    let (s, s_at) = fields.take("s", "<+|->")?;
                    let sign = match s {
                        "+" => Sign::Plus,
                        "-" => Sign::Minus,
                        other => {
                            return Err(Error::parse(
                                s_at,
                                format!("expected `+` or `-`, found `{other}`"),
                            ))
                        }
                    };
                    fields.finish()?;
                    MapDescriptor::sine_affine(gamma, shift, sign)
                }
            };
            built.map_err(|e| Error::parse(g_at, e.to_string()))?
        }
        other => {
            return Err(Error::parse(
                kind_at,
                format!("expected one of power, tcheb, exp, affexp, sine; found `{other}`"),
            ))
        }
    };
    Ok(map)
}

/// The map grammar as printed by the `catalog` command.
pub const MAP_GRAMMAR: &str = "\
power d=<int> b=<complex>              z^d / b            (d >= 2, b != 0)
tcheb n=<int>                          T_n(z)             (n >= 2)
exp gamma=<complex> c=<complex>        exp(gamma z + c)   (gamma != 0)
affexp gamma=<complex> c=<complex>     z + gamma exp(z) + c
sine gamma=<complex> c=<complex> s=<+|->   s (z + gamma sin z) + c
<complex> is a, a+bi or a-bi in decimal notation";
