//! Acceptance checks. Runs as a plain binary (`harness = false`) and prints
//! one PASS/FAIL line per criterion; exits nonzero if any fail.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wsm_core::bench::{run_bench, write_rows, BenchConfig, BenchRow};
use wsm_core::histogram::build_histogram;
use wsm_core::imageio::{load_image, RawImage};
use wsm_core::init::{init_forgy, kmeanspp_indices, SeedConfig};
use wsm_core::kmeans::{kmeans_full, wsm, wsm_observed};
use wsm_core::pipeline::{run_quantize, Method, QuantizeConfig, Seeding};
use wsm_core::precluster::{build_coarse_histogram, wu_traced};
use wsm_core::{ColorPoint, Rgb8, Termination, WeightedData};

type Check = Result<String, String>;

fn images_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../testdata/images")
}

fn fixture_paths() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(images_dir())
        .expect("testdata/images")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .collect();
    v.sort();
    v
}

fn load(path: &PathBuf) -> RawImage {
    load_image(path).unwrap().image
}

const SUITE_KS: [usize; 4] = [32, 64, 128, 256];

fn suite_config() -> BenchConfig {
    let mut cfg = BenchConfig::new(fixture_paths(), Method::all(), SUITE_KS.to_vec());
    cfg.seed_base = 1;
    cfg.record_time = false;
    cfg
}

/// The full benchmark suite, computed once.
fn suite() -> &'static Vec<BenchRow> {
    static ROWS: OnceLock<Vec<BenchRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        let t = Instant::now();
        let rows = run_bench(&suite_config()).unwrap();
        eprintln!("  (benchmark suite: {} rows in {:.1}s)", rows.len(), t.elapsed().as_secs_f64());
        rows
    })
}

fn suite_mse(image: &str, method: &str, k: usize) -> Option<f64> {
    suite()
        .iter()
        .filter_map(BenchRow::report)
        .find(|r| r.image == image && r.method == method && r.k == k)
        .map(|r| r.mse)
}

fn brute_min(x: &ColorPoint, centers: &[ColorPoint]) -> f64 {
    centers.iter().map(|c| x.dist2(c)).fold(f64::INFINITY, f64::min)
}

/// Clustered random colors, with repeats.
fn blob_pixels(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rgb8> {
    let blobs: Vec<[f64; 3]> = (0..rng.gen_range(1..12))
        .map(|_| [rng.gen_range(0.0..255.0), rng.gen_range(0.0..255.0), rng.gen_range(0.0..255.0)])
        .collect();
    let spread = rng.gen_range(2.0..40.0);
    (0..n)
        .map(|_| {
            let b = blobs[rng.gen_range(0..blobs.len())];
            b.map(|c| (c + rng.gen_range(-spread..spread)).round().clamp(0.0, 255.0) as u8)
        })
        .collect()
}

fn c1_pruning_exactness() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut checked, mut bad) = (0u64, 0u64);
    let instances = 120;
    for inst in 0..instances {
        let n = rng.gen_range(50..=5000);
        let h = build_histogram(&blob_pixels(&mut rng, n), inst).unwrap();
        let k = rng.gen_range(1..=h.len().min(64));
        let init = init_forgy(&h, &SeedConfig::new(k, inst)).unwrap();
        wsm_observed(&h, &init, &Termination::fixed(20), |view| {
            for (x, &m) in h.points().iter().zip(view.memberships) {
                checked += 1;
                if x.dist2(&view.centers[m]) != brute_min(x, view.centers) {
                    bad += 1;
                }
            }
        })
        .unwrap();
    }
    let secs = t.elapsed().as_secs_f64();
    let detail = format!("{instances} instances, {checked} assignments, {bad} mismatches, {secs:.1}s");
    if bad == 0 && secs < 60.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c2_histogram_exactness() -> Check {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for path in fixture_paths() {
        let img = load(&path);
        for (r0, c0) in [(0usize, 0usize), (img.height() / 2, img.width() / 3)] {
            let mut px = Vec::new();
            for r in r0..r0 + 64 {
                for c in c0..c0 + 64 {
                    px.push(img.pixel(r, c));
                }
            }
            let h = build_histogram(&px, 3).unwrap();
            let raw: Vec<ColorPoint> = px.iter().map(|&p| ColorPoint::from_rgb8(p)).collect();
            let init = init_forgy(&h, &SeedConfig::new(16.min(h.len()), cases)).unwrap();
            let term = Termination::fixed(20);
            let a = kmeans_full(&raw, &init, &term).unwrap();
            let b = wsm(&h, &init, &term).unwrap();
            if a.sse_trace.len() != b.sse_trace.len() {
                return Err(format!("{}: trace lengths differ", path.display()));
            }
            for (x, y) in a.sse_trace.iter().zip(&b.sse_trace) {
                let rel = (x - y).abs() / x.abs().max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
            }
            cases += 1;
        }
    }
    let detail = format!("{cases} crops of 64x64, worst relative SSE difference {worst:.3e}");
    if cases >= 10 && worst <= 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c3_monotone_descent() -> Check {
    let rows = suite();
    let wsm_rows = rows
        .iter()
        .filter_map(BenchRow::report)
        .filter(|r| r.method.starts_with("wsm-"))
        .count();
    let violations = rows
        .iter()
        .filter_map(BenchRow::report)
        .filter(|r| r.flags.split(';').any(|f| f == "sse-increase"))
        .count();
    let failed = rows.iter().filter(|r| r.report().is_none()).count();
    let detail = format!("{wsm_rows} WSM runs, {violations} with an SSE increase, {failed} failed cells");
    if violations == 0 && failed == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c4_ndc_reduction() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for path in fixture_paths() {
        let h = build_histogram(load(&path).pixels(), 0).unwrap();
        for k in [32usize, 64, 128, 256] {
            let init = init_forgy(&h, &SeedConfig::new(k, 42)).unwrap();
            let s = wsm(&h, &init, &Termination::fixed(20)).unwrap();
            let ndc = s.ndc_per_point_iteration();
            ok &= ndc <= k as f64 / 4.0;
            lines.push(format!("{}@{k}={ndc:.2}", path.file_stem().unwrap().to_string_lossy()));
        }
    }
    let detail = format!("NDC per point per iteration: {}", lines.join(" "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const PRECLUSTERERS: [&str; 6] = ["mc", "ott", "oct", "wan", "wu", "bs"];

/// Property form: MSE(wsm-x) <= MSE(x) + 1e-9 over the suite.
fn refinement_property() -> Result<usize, String> {
    let mut compared = 0;
    for path in fixture_paths() {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        for k in SUITE_KS {
            for x in PRECLUSTERERS {
                let base = suite_mse(&name, x, k).ok_or(format!("missing {name} {x} k={k}"))?;
                let refined = suite_mse(&name, &format!("wsm-{x}"), k).ok_or(format!("missing {name} wsm-{x} k={k}"))?;
                if refined > base + 1e-9 {
                    return Err(format!("{name} k={k}: wsm-{x} {refined} > {x} {base}"));
                }
                compared += 1;
            }
        }
    }
    Ok(compared)
}

fn c5_refinement_improvement() -> Check {
    let compared = refinement_property()?;
    let mut gains = Vec::new();
    for path in fixture_paths() {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let mc = suite_mse(&name, "mc", 32).unwrap();
        let w = suite_mse(&name, "wsm-mc", 32).unwrap();
        gains.push((mc - w) / mc);
    }
    let mean = gains.iter().sum::<f64>() / gains.len() as f64;
    let detail = format!(
        "{compared} (image, k, x) pairs non-worsening; wsm-mc vs mc at K=32: mean MSE reduction {:.1}% (per image {})",
        mean * 100.0,
        gains.iter().map(|g| format!("{:.1}%", g * 100.0)).collect::<Vec<_>>().join(", ")
    );
    if mean >= 0.30 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c6_absolute_mse() -> Check {
    let lenna = ["lenna.png", "lena.png", "Lenna.png"]
        .iter()
        .map(|f| images_dir().join(f))
        .find(|p| p.exists());
    match lenna {
        Some(path) => {
            let img = load(&path);
            let q = run_quantize(&img, "lenna", &QuantizeConfig::new("wsm-wu".parse().unwrap(), 64)).unwrap();
            let detail = format!("wsm-wu K=64 MSE {:.2} (target 72.0 ± 20%)", q.report.mse);
            if (q.report.mse - 72.0).abs() <= 0.2 * 72.0 {
                Ok(detail)
            } else {
                Err(detail)
            }
        }
        None => {
            let compared = refinement_property()?;
            Ok(format!("canonical Lenna not available; property form holds on {compared} pairs"))
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn c7_sublinear_scaling() -> Check {
    let path = images_dir().join("hubble.png");
    let img = load(&path);
    let mp = img.pixels().len() as f64 / 1e6;
    let time_at = |k: usize| {
        let times: Vec<f64> = (0..5)
            .map(|run| {
                let mut cfg = QuantizeConfig::new(Method::Wsm(Seeding::Init(wsm_core::init::InitScheme::Forgy)), k);
                cfg.seed = run;
                cfg.termination = Termination::fixed(20);
                run_quantize(&img, "hubble", &cfg).unwrap().report.time_ms
            })
            .collect();
        median(times)
    };
    let (t16, t256) = (time_at(16), time_at(256));
    let ratio = t256 / t16;
    let detail = format!("hubble ({mp:.2} MP): median {t16:.0} ms at K=16, {t256:.0} ms at K=256, ratio {ratio:.2}");
    if mp >= 0.5 && ratio <= 8.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c8_kmeanspp_law() -> Check {
    let h = build_histogram(&[[0, 0, 0], [255, 255, 255], [128, 128, 128]], 0).unwrap();
    let black = h.rgb().iter().position(|&c| c == [0, 0, 0]).unwrap();
    let white = h.rgb().iter().position(|&c| c == [255, 255, 255]).unwrap();
    let trials = 100_000u64;
    let hits = (0..trials)
        .filter(|&s| kmeanspp_indices(&h, black, 2, &mut ChaCha8Rng::seed_from_u64(s))[1] == white)
        .count();
    let p = hits as f64 / trials as f64;
    let expected = 195075.0 / (195075.0 + 49152.0);
    let detail = format!("P(white) = {p:.4} over {trials} trials (analytic {expected:.4})");
    if (p - expected).abs() <= 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// SSE of the pixels falling in a bin box, straight from the pixels.
fn box_sse(px: &[Rgb8], lo: [usize; 3], hi: [usize; 3]) -> Option<f64> {
    let inside: Vec<[f64; 3]> = px
        .iter()
        .filter(|p| (0..3).all(|a| (lo[a]..=hi[a]).contains(&((p[a] >> 3) as usize))))
        .map(|p| p.map(f64::from))
        .collect();
    if inside.is_empty() {
        return None;
    }
    let n = inside.len() as f64;
    let mean = [0, 1, 2].map(|a| inside.iter().map(|p| p[a]).sum::<f64>() / n);
    Some(inside.iter().map(|p| (0..3).map(|a| (p[a] - mean[a]).powi(2)).sum::<f64>()).sum())
}

fn c9_wu_step_optimality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let (instances, mut splits) = (25, 0);
    for inst in 0..instances {
        let n = rng.gen_range(20..400);
        let px = blob_pixels(&mut rng, n);
        let k = rng.gen_range(2..=16);
        let (_, trace) = wu_traced(&build_coarse_histogram(&px).unwrap(), k).unwrap();
        for s in &trace {
            let (lo, hi) = (s.parent.lo, s.parent.hi);
            let mut best = f64::INFINITY;
            for axis in 0..3 {
                for cut in lo[axis]..hi[axis] {
                    let (mut lhi, mut rlo) = (hi, lo);
                    lhi[axis] = cut;
                    rlo[axis] = cut + 1;
                    if let (Some(a), Some(b)) = (box_sse(&px, lo, lhi), box_sse(&px, rlo, hi)) {
                        best = best.min(a + b);
                    }
                }
            }
            let (mut lhi, mut rlo) = (hi, lo);
            lhi[s.axis] = s.cut;
            rlo[s.axis] = s.cut + 1;
            let chosen = box_sse(&px, lo, lhi).zip(box_sse(&px, rlo, hi)).map(|(a, b)| a + b);
            let tol = 1e-7 * (1.0 + best);
            match chosen {
                Some(c) if (c - best).abs() <= tol && (s.cost - best).abs() <= tol => splits += 1,
                _ => {
                    return Err(format!(
                        "instance {inst}: split {:?} axis {} cut {} costs {chosen:?}, optimum {best}",
                        s.parent, s.axis, s.cut
                    ))
                }
            }
        }
    }
    Ok(format!("{instances} instances, {splits} splits all at the brute-force optimum"))
}

fn c10_determinism() -> Check {
    let mut a = Vec::new();
    write_rows(suite(), &mut a).unwrap();
    let mut b = Vec::new();
    write_rows(&run_bench(&suite_config()).unwrap(), &mut b).unwrap();
    let detail = format!("{} bytes per CSV, time column disabled", a.len());
    if a == b {
        Ok(detail)
    } else {
        Err(format!("CSVs differ ({detail})"))
    }
}

fn main() {
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Check); 10] = [
        ("1 pruning exactness", c1_pruning_exactness),
        ("2 weighted-histogram exactness", c2_histogram_exactness),
        ("3 monotone descent", c3_monotone_descent),
        ("4 NDC reduction", c4_ndc_reduction),
        ("5 refinement improvement", c5_refinement_improvement),
        ("6 absolute MSE ballpark", c6_absolute_mse),
        ("7 sublinear scaling in K", c7_sublinear_scaling),
        ("8 k-means++ law", c8_kmeanspp_law),
        ("9 WU step-optimality", c9_wu_step_optimality),
        ("10 determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.starts_with(&format!("{o} "))) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(d) => println!("PASS criterion {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
