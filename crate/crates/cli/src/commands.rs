use std::fs;
use std::io::Write;
use std::path::Path;

use floquet_core::classify::{critical_points, definiteness_radius, interval_partition, negative_squares};
use floquet_core::discriminant::{sample, DiscriminantSample};
use floquet_core::greens::{apply_resolvent, ResolventRequest};
use floquet_core::spectrum::{eigenvalues_in_box, real_bands, trace_curves, ComplexBox};
use floquet_core::transfer::solve_trace;
use floquet_core::{CoefficientSet, Complex64, FloquetError, Problem, DEFAULT_TOL};
use serde_json::{json, Value};

use crate::diag::Failure;
use crate::format::{csv_header, json_payload, num, row};
use crate::{Cli, Command, Format};

type Result<T> = std::result::Result<T, Failure>;

pub fn run(cli: &Cli) -> Result<()> {
    let common = &cli.common;
    let input = common
        .input
        .as_deref()
        .ok_or_else(|| Failure::invalid("MissingInput", "--input <coefficient JSON> is required"))?;
    let cs = load_coefficients(input)?;
    let payload = match &cli.command {
        // `check` reports on the raw set, so it must not demand validity up front
        Command::Check => {
            json_only(common.format)?;
            check(&cs)?
        }
        cmd => {
            let pr = Problem::new(cs, common.tol.unwrap_or(DEFAULT_TOL))?;
            dispatch(&pr, cmd, common.format)?
        }
    };
    match &common.output {
        Some(path) => fs::write(path, payload).map_err(|e| Failure::io(&path.display().to_string(), e)),
        None => match std::io::stdout().lock().write_all(payload.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::io("<stdout>", e)),
            _ => Ok(()),
        },
    }
}

fn dispatch(pr: &Problem, cmd: &Command, format: Option<Format>) -> Result<String> {
    match cmd {
        Command::Scan { re, im, n } => scan(pr, pair("--re", re)?, pair("--im", im)?, *n, format_or(format, Format::Csv)),
        Command::Bands { window } => bands(pr, window_of(window)?, format_or(format, Format::Csv)),
        Command::Curves { bbox, seeds } => {
            json_only(format)?;
            curves(pr, box_of(bbox)?, *seeds)
        }
        Command::Eigs { t, bbox, max_roots } => eigs(pr, *t, box_of(bbox)?, *max_roots, format_or(format, Format::Csv)),
        Command::Classify {
            window,
            im_half,
            kappa_samples,
            no_radius,
        } => {
            json_only(format)?;
            classify(pr, window_of(window)?, *im_half, *kappa_samples, !*no_radius)
        }
        Command::Resolve { z, lambda, g } => resolve(
            pr,
            complex("--z", z)?,
            complex("--lambda", lambda)?,
            g,
            format_or(format, Format::Csv),
        ),
        Command::Trace { lambda, n } => trace(pr, complex("--lambda", lambda)?, *n, format_or(format, Format::Csv)),
        Command::Check => unreachable!("handled before the problem is built"),
    }
}

fn load_coefficients(path: &Path) -> Result<CoefficientSet> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(&path.display().to_string(), e))?;
    let cs = CoefficientSet::from_json_str(&text)?;
    Ok(cs)
}

fn format_or(f: Option<Format>, default: Format) -> Format {
    f.unwrap_or(default)
}

fn json_only(f: Option<Format>) -> Result<()> {
    match f {
        Some(Format::Csv) => Err(Failure::invalid("UnsupportedFormat", "this subcommand only writes JSON")),
        _ => Ok(()),
    }
}

fn pair(flag: &str, v: &[f64]) -> Result<(f64, f64)> {
    match *v {
        [x] if x.is_finite() => Ok((x, x)),
        [lo, hi] if lo.is_finite() && hi.is_finite() && lo <= hi => Ok((lo, hi)),
        _ => Err(Failure::invalid("InvalidInput", format!("{flag} expects `lo,hi` with lo <= hi"))),
    }
}

fn window_of(v: &[f64]) -> Result<(f64, f64)> {
    match pair("--window", v)? {
        (lo, hi) if lo < hi => Ok((lo, hi)),
        _ => Err(Failure::invalid("InvalidInput", "--window must be non-empty")),
    }
}

fn box_of(v: &[f64]) -> Result<ComplexBox> {
    match *v {
        [a, b, c, d] => Ok(ComplexBox::new(a, b, c, d)?),
        _ => Err(Failure::invalid("InvalidInput", "--box expects `reLo,reHi,imLo,imHi`")),
    }
}

/// `re` or `re,im`.
fn complex(flag: &str, s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parsed: std::result::Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
    match parsed.as_deref() {
        Ok([re]) => Ok(Complex64::new(*re, 0.0)),
        Ok([re, im]) => Ok(Complex64::new(*re, *im)),
        _ => Err(Failure::invalid("InvalidInput", format!("{flag} expects `re` or `re,im`, got `{s}`"))),
    }
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if lo == hi || n < 2 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Samples every grid point, spread over worker threads; results keep the
/// grid order (imaginary part outer, real part inner).
fn scan(pr: &Problem, re: (f64, f64), im: (f64, f64), n: usize, format: Format) -> Result<String> {
    let xs = axis(re.0, re.1, n);
    let ys = axis(im.0, im.1, n);
    let pts: Vec<Complex64> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| Complex64::new(x, y))).collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(pts.len());
    let chunk = pts.len().div_ceil(workers);
    let results: Vec<floquet_core::Result<DiscriminantSample>> = std::thread::scope(|s| {
        let handles: Vec<_> = pts
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(|&z| sample(pr, z)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("scan worker panicked")).collect()
    });
    let samples = results.into_iter().collect::<floquet_core::Result<Vec<_>>>()?;
    Ok(match format {
        Format::Csv => {
            let mut out = csv_header(
                "scan",
                &["re_lambda", "im_lambda", "re_d", "im_d", "re_ddot", "im_ddot", "residual_cross_check"],
            );
            for s in &samples {
                out += &row(&[
                    num(s.lambda.re),
                    num(s.lambda.im),
                    num(s.d.re),
                    num(s.d.im),
                    num(s.ddot.re),
                    num(s.ddot.im),
                    num(s.residual_cross_check),
                ]);
            }
            out
        }
        Format::Json => json_payload("scan", json!({ "samples": samples })),
    })
}

fn bands(pr: &Problem, (lo, hi): (f64, f64), format: Format) -> Result<String> {
    let bands = real_bands(pr, lo, hi)?;
    Ok(match format {
        Format::Csv => {
            let mut out = csv_header("bands", &["lo", "hi", "d_lo", "d_hi", "monotone"]);
            for b in &bands {
                out += &row(&[num(b.lo), num(b.hi), num(b.d_lo), num(b.d_hi), b.monotone.to_string()]);
            }
            out
        }
        Format::Json => json_payload("bands", json!({ "window": [lo, hi], "bands": bands })),
    })
}

fn curves(pr: &Problem, bbox: ComplexBox, seeds: usize) -> Result<String> {
    let mut curves = trace_curves(pr, bbox, seeds)?;
    let first = |c: &floquet_core::spectrum::SpectralCurve| c.points.first().map(|p| (p.lambda.re, p.lambda.im));
    curves.sort_by(|a, b| first(a).partial_cmp(&first(b)).unwrap_or(std::cmp::Ordering::Equal));
    let list: Vec<Value> = curves
        .iter()
        .map(|c| {
            json!({
                "points": c.points.iter().map(|p| [p.t, p.lambda.re, p.lambda.im]).collect::<Vec<_>>(),
                "reasons": [c.start_reason, c.end_reason],
                "is_real": c.is_real,
            })
        })
        .collect();
    Ok(json_payload("curves", json!({ "box": bbox, "curves": list })))
}

fn eigs(pr: &Problem, t: f64, bbox: ComplexBox, max_roots: usize, format: Format) -> Result<String> {
    let mut list = eigenvalues_in_box(pr, t, bbox, max_roots)?;
    list.roots
        .sort_by(|a, b| (a.lambda.re, a.lambda.im).partial_cmp(&(b.lambda.re, b.lambda.im)).unwrap_or(std::cmp::Ordering::Equal));
    Ok(match format {
        Format::Csv => {
            let mut out = csv_header("eigs", &["re_lambda", "im_lambda", "multiplicity", "residual"]);
            for r in &list.roots {
                out += &row(&[num(r.lambda.re), num(r.lambda.im), r.multiplicity.to_string(), num(r.newton_residual)]);
            }
            out
        }
        Format::Json => json_payload("eigs", json!({ "eigenvalues": list })),
    })
}

fn classify(
    pr: &Problem,
    (lo, hi): (f64, f64),
    im_half: f64,
    kappa_samples: usize,
    with_radius: bool,
) -> Result<String> {
    if !(im_half > 0.0) {
        return Err(Failure::invalid("InvalidInput", "--im-half must be positive"));
    }
    let partition = interval_partition(pr, lo, hi)?;
    let mut critical = critical_points(pr, ComplexBox::new(lo, hi, -im_half, im_half)?)?;
    critical.sort_by(|a, b| {
        (a.lambda0.re, a.lambda0.im)
            .partial_cmp(&(b.lambda0.re, b.lambda0.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let ts = axis(0.0, std::f64::consts::PI, kappa_samples.max(2));
    let kappa = ts
        .iter()
        .map(|&t| negative_squares(pr, t))
        .collect::<floquet_core::Result<Vec<_>>>()?;
    let radii = if with_radius { json!(definiteness_radius(pr)?) } else { Value::Null };
    Ok(json_payload(
        "classify",
        json!({
            "window": [lo, hi],
            "partition": partition,
            "critical_points": critical,
            "kappa": kappa,
            "radii": radii,
        }),
    ))
}

/// Rows of `x, Re g, Im g`; blank lines, `#` comments and a non-numeric
/// header line are skipped.
fn read_samples(path: &Path) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(&path.display().to_string(), e))?;
    let (mut xs, mut gs) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: std::result::Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        match cols.as_deref() {
            Ok([x, re, im]) => {
                xs.push(*x);
                gs.push(Complex64::new(*re, *im));
            }
            Ok([x, re]) => {
                xs.push(*x);
                gs.push(Complex64::new(*re, 0.0));
            }
            Err(_) if xs.is_empty() && i == 0 => continue,
            _ => {
                return Err(Failure::invalid(
                    "InvalidInput",
                    format!("{}:{}: expected `x, Re g, Im g`", path.display(), i + 1),
                ))
            }
        }
    }
    Ok((xs, gs))
}

fn resolve(pr: &Problem, z: Complex64, lambda: Complex64, g: &Path, format: Format) -> Result<String> {
    let (grid, g) = read_samples(g)?;
    let out = apply_resolvent(pr, &ResolventRequest { z, lambda, grid, g })?;
    Ok(match format {
        Format::Csv => {
            let mut s = csv_header("resolve", &["x", "re_f", "im_f", "re_pf", "im_pf"]);
            for ((x, f), pf) in out.grid.iter().zip(&out.f).zip(&out.pf) {
                s += &row(&[num(*x), num(f.re), num(f.im), num(pf.re), num(pf.im)]);
            }
            s
        }
        Format::Json => json_payload("resolve", json!({ "z": z, "lambda": lambda, "result": out })),
    })
}

fn trace(pr: &Problem, lambda: Complex64, n: usize, format: Format) -> Result<String> {
    let tr = solve_trace(pr, lambda, n)?;
    Ok(match format {
        Format::Csv => {
            let mut s = csv_header(
                "trace",
                &["x", "re_phi", "im_phi", "re_pphi", "im_pphi", "re_psi", "im_psi", "re_ppsi", "im_ppsi"],
            );
            for (x, u) in tr.grid.iter().zip(&tr.values) {
                let mut fields = vec![num(*x)];
                for v in u {
                    fields.push(num(v.re));
                    fields.push(num(v.im));
                }
                s += &row(&fields);
            }
            s
        }
        Format::Json => json_payload("trace", json!({ "lambda": lambda, "trace": tr })),
    })
}

fn check(cs: &CoefficientSet) -> Result<String> {
    let report = cs.validate();
    if !report.is_valid() {
        return Err(FloquetError::InvalidCoefficients(report).into());
    }
    let signs = cs.weight_signs()?;
    Ok(json_payload(
        "check",
        json!({
            "period": cs.period_a,
            "segments": cs.segments.len(),
            "weight_signs": signs,
            "indefinite": cs.is_indefinite()?,
            "turning_points": cs.turning_points()?,
            "infinity_condition": cs.infinity_condition()?,
        }),
    ))
}
