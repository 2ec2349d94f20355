//! Acceptance suite: every criterion prints one PASS/FAIL line and the
//! process exits non-zero if any criterion fails.
//!
//! Run alone with `cargo test -p nfwpt-core --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nfwpt::channel::scatter_channel_vector;
use nfwpt::cli::{run, Command};
use nfwpt::evaluation::{
    beam_diversity_prefix_maps, empirical_cdf, fading_margin, local_minima, pg_map_plane,
    strategy_map, to_db, MapMetadata,
};
use nfwpt::geometry::{mirror_point, ImageSource, ReflectingPlane};
use nfwpt::{Point3, Precoder, ScattererField, ScenarioConfig, WeightVector};

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn within_runtime(start: Instant, limit: Duration, mut o: Outcome) -> Outcome {
    let t = start.elapsed();
    if t > limit {
        o.passed = false;
    }
    o.detail = format!(
        "{}; runtime {:.2} s (limit {} s)",
        o.detail,
        t.as_secs_f64(),
        limit.as_secs()
    );
    o
}

/// LoS only, no reflectors, no scatterers.
fn free_space(n_x: usize, n_z: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.reflectors.clear();
    cfg.scatterers.density_per_m3 = 0.0;
    cfg.array.n_x = n_x;
    cfg.array.n_z = n_z;
    cfg
}

fn friis_oracle() -> Outcome {
    let start = Instant::now();
    let cfg = free_space(1, 1);
    let sc = cfg.build(0).unwrap();
    let target = cfg.device_position();
    let w = sc.precoder_weights(Precoder::LosOnlyMrt, target).unwrap();
    let pg_db = to_db(sc.path_gain(&w, target).unwrap());
    let lambda = 299_792_458.0 / 2.4e9;
    let oracle_db = 20.0 * (lambda / (4.0 * PI * 8.125)).log10();
    let ok = (pg_db - -58.25).abs() <= 0.01 && (pg_db - oracle_db).abs() < 1e-9;
    within_runtime(
        start,
        Duration::from_secs(1),
        check(
            ok,
            format!("PG {pg_db:.4} dB, analytic {oracle_db:.4} dB, target -58.25 ± 0.01 dB"),
        ),
    )
}

fn array_gain_oracle() -> Outcome {
    let start = Instant::now();
    let cfg = free_space(40, 24);
    let sc = cfg.build(0).unwrap();
    let target = cfg.device_position();
    let w = sc.precoder_weights(Precoder::LosOnlyMrt, target).unwrap();
    let pg_db = to_db(sc.path_gain(&w, target).unwrap());

    // element-by-element Friis sum over an independently built lattice
    let lambda = 299_792_458.0 / 2.4e9;
    let spacing = lambda / 2.0;
    let mut sum = 0.0;
    for iz in 0..24 {
        for ix in 0..40 {
            let x = 5.0 + (ix as f64 - 19.5) * spacing;
            let z = 1.0 + (iz as f64 - 11.5) * spacing;
            let d = ((x - 5.0).powi(2) + 8.125f64.powi(2) + (z - 1.0).powi(2)).sqrt();
            sum += (lambda / (4.0 * PI * d)).powi(2);
        }
    }
    let oracle_db = to_db(sum);
    let ok = (pg_db - oracle_db).abs() <= 0.3 && (pg_db - -28.4).abs() <= 0.3;
    within_runtime(
        start,
        Duration::from_secs(5),
        check(
            ok,
            format!("PG {pg_db:.3} dB, brute-force sum {oracle_db:.3} dB (±0.3 dB)"),
        ),
    )
}

fn headline_path_gain() -> Outcome {
    let start = Instant::now();
    let base = ScenarioConfig::default();
    let target = base.device_position();
    let values: Vec<f64> = (1..=20)
        .map(|seed| {
            let cfg = ScenarioConfig {
                seed,
                ..base.clone()
            };
            let sc = cfg.build(0).unwrap();
            let w = sc.precoder_weights(Precoder::MrtFull, target).unwrap();
            to_db(sc.path_gain(&w, target).unwrap())
        })
        .collect();
    let pg = median(values);
    let p_rx_dbm = pg + 10.0 * (base.p_tx_watt * 1e3).log10();
    let ok = (pg - -23.8).abs() <= 1.5 && (p_rx_dbm - 12.2).abs() <= 1.5;
    within_runtime(
        start,
        Duration::from_secs(120),
        check(
            ok,
            format!("median PG {pg:.2} dB over 20 seeds (target -23.8 ± 1.5), P_RX {p_rx_dbm:.2} dBm at 4 W"),
        ),
    )
}

/// Disc margins for seeds 1..=10: (N_R=16 vs MRT, N_R=4 vs N_R=1).
fn margin_sweep() -> (Vec<f64>, Vec<f64>, Duration) {
    let start = Instant::now();
    let base = ScenarioConfig::default();
    let target = base.device_position();
    let (mut vs_mrt, mut vs_single) = (Vec::new(), Vec::new());
    for seed in 1..=10 {
        let cfg = ScenarioConfig {
            seed,
            ..base.clone()
        };
        let sc = cfg.build(0).unwrap();
        let domain = cfg.disc_domain();
        let mut cdfs = BTreeMap::new();
        let mrt = strategy_map(&sc, Precoder::MrtFull, target, &domain, 1, seed).unwrap();
        cdfs.insert("mrt-full".to_string(), empirical_cdf(&mrt).unwrap());
        for (n, map) in beam_diversity_prefix_maps(&sc, target, &domain, &[1, 4, 16], seed).unwrap()
        {
            cdfs.insert(format!("nr{n}"), empirical_cdf(&map).unwrap());
        }
        let report = fading_margin(&cdfs, 1e-2, "mrt-full").unwrap();
        let q = |k: &str| report.entry(k).unwrap().pg_at_outage_db;
        vs_mrt.push(report.entry("nr16").unwrap().reduction_db);
        vs_single.push(q("nr4") - q("nr1"));
    }
    (vs_mrt, vs_single, start.elapsed())
}

fn standing_wave_spacing() -> Outcome {
    let cfg = ScenarioConfig::default();
    let sc = cfg.build(0).unwrap();
    let lambda = cfg.wavelength();
    let target = cfg.device_position();
    let w = sc.precoder_weights(Precoder::MrtFull, target).unwrap();
    let meta = MapMetadata {
        precoder: Precoder::MrtFull,
        n_realizations: 1,
        master_seed: cfg.seed,
        flag_radius: lambda,
    };
    // line through the focal point towards the back wall, λ/64 resolution
    let map = pg_map_plane(&sc, &w, 1.0, (5.0, 5.0), (8.2, 9.0), lambda / 64.0, meta).unwrap();
    let ys: Vec<f64> = map.points.iter().map(|p| p.y).collect();
    let minima = local_minima(&ys, &map.pg);
    let gaps: Vec<f64> = minima.windows(2).map(|w| w[1] - w[0]).collect();
    let spacing = median(gaps);
    let ratio = spacing / (lambda / 2.0);
    check(
        minima.len() >= 4 && (ratio - 1.0).abs() <= 0.1,
        format!(
            "{} minima, median spacing {:.4} m = {:.3} x λ/2 (±10 %)",
            minima.len(),
            spacing,
            ratio
        ),
    )
}

fn mrt_optimality() -> Outcome {
    let cfg = ScenarioConfig::default();
    let sc = cfg.build(0).unwrap();
    let target = cfg.device_position();
    let h = sc.total_channel(target).unwrap();
    let w = sc.precoder_weights(Precoder::MrtFull, target).unwrap();
    let best = h.apply(w.as_slice()).unwrap().norm_sqr();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..1000 {
        let raw: Vec<Complex64> = (0..h.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let w2 = WeightVector::normalized(raw).unwrap();
        let pg = h.apply(w2.as_slice()).unwrap().norm_sqr();
        worst_ratio = worst_ratio.max(pg / best);
    }
    let rotated: Vec<Complex64> = w
        .as_slice()
        .iter()
        .map(|v| v * Complex64::from_polar(1.0, 0.77))
        .collect();
    let eq = h.apply(&rotated).unwrap().norm_sqr();
    let identity = (best / h.norm_sqr() - 1.0).abs();
    check(
        worst_ratio <= 1.0 && (eq / best - 1.0).abs() < 1e-12 && identity < 1e-12,
        format!("max random/MRT ratio {worst_ratio:.3e}, |PG/‖h‖² - 1| = {identity:.1e}"),
    )
}

fn random_point(rng: &mut ChaCha8Rng, scale: f64) -> Point3 {
    Point3::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

fn matrix_vs_path_sum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let lambda = 0.125;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let l = rng.random_range(1..=5);
        let n = rng.random_range(1..=4);
        let image = ImageSource {
            index: 1,
            positions: (0..l).map(|_| random_point(&mut rng, 2.0)).collect(),
            gain: Complex64::from_polar(rng.random_range(0.1..1.0), rng.random_range(0.0..TAU)),
            is_los: false,
        };
        let field = ScattererField {
            positions: (0..n)
                .map(|_| random_point(&mut rng, 3.0) + Point3::new(5.0, 0.0, 0.0))
                .collect(),
            rcs: (0..n).map(|_| rng.random_range(0.001..0.1)).collect(),
            phases: (0..n).map(|_| rng.random_range(0.0..TAU)).collect(),
        };
        let rx = random_point(&mut rng, 1.0) + Point3::new(-5.0, 0.0, 0.0);
        let fast = scatter_channel_vector(&image, &field, rx, lambda).unwrap();

        // explicit sum over every element -> scatterer -> receiver path
        let k = TAU / lambda;
        let mut brute = vec![Complex64::new(0.0, 0.0); l];
        for (ell, q) in image.positions.iter().enumerate() {
            for m in 0..n {
                let p = field.positions[m];
                let d_tx = ((p.x - q.x).powi(2) + (p.y - q.y).powi(2) + (p.z - q.z).powi(2)).sqrt();
                let d_rx =
                    ((p.x - rx.x).powi(2) + (p.y - rx.y).powi(2) + (p.z - rx.z).powi(2)).sqrt();
                let tx =
                    image.gain * Complex64::new(0.0, -k * d_tx).exp() / ((4.0 * PI).sqrt() * d_tx);
                let sigma = Complex64::from_polar(field.rcs[m].sqrt(), field.phases[m]);
                let rxg = Complex64::new(0.0, -k * d_rx).exp() * lambda / (4.0 * PI * d_rx);
                brute[ell] += rxg * sigma * tx;
            }
        }
        let diff: f64 = fast
            .entries
            .iter()
            .zip(&brute)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let norm: f64 = brute.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(diff / norm);
    }
    check(
        worst <= 1e-12,
        format!("worst relative error {worst:.2e} over 100 instances"),
    )
}

fn global_phase_invariance() -> Outcome {
    let cfg = ScenarioConfig::default();
    let sc = cfg.build(0).unwrap();
    let target = cfg.device_position();
    let w = sc.precoder_weights(Precoder::MrtSmc, target).unwrap();
    let mut worst: f64 = 0.0;
    for (i, phi) in [0.3, 1.9, 4.4].into_iter().enumerate() {
        let rotated = WeightVector::new(
            w.as_slice()
                .iter()
                .map(|v| v * Complex64::from_polar(1.0, phi))
                .collect(),
        )
        .unwrap();
        let p = target + Point3::new(0.05 * i as f64, -0.1, 0.0);
        let a = sc.path_gain(&w, p).unwrap();
        let b = sc.path_gain(&rotated, p).unwrap();
        worst = worst.max((a / b - 1.0).abs());
    }
    check(
        worst < 1e-12,
        format!("worst relative PG change {worst:.1e}"),
    )
}

fn mirror_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut involution, mut distance): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let plane = ReflectingPlane::new(
            random_point(&mut rng, 10.0),
            random_point(&mut rng, 1.0),
            Complex64::new(0.5, 0.0),
        )
        .unwrap();
        let a = random_point(&mut rng, 10.0);
        let b = random_point(&mut rng, 10.0);
        involution = involution.max(mirror_point(mirror_point(a, &plane), &plane).distance(a));
        let da = mirror_point(a, &plane).distance(mirror_point(b, &plane));
        distance = distance.max((da - a.distance(b)).abs());
    }
    check(
        involution <= 1e-12 * 100.0 && distance <= 1e-12 * 100.0,
        format!("max involution error {involution:.1e} m, max distance error {distance:.1e} m (coordinates up to 10 m)"),
    )
}

fn prefix_max_dominance() -> Outcome {
    let cfg = ScenarioConfig::default();
    let sc = cfg.build(0).unwrap();
    let target = cfg.device_position();
    let maps =
        beam_diversity_prefix_maps(&sc, target, &cfg.disc_domain(), &[1, 2, 4, 8, 16], cfg.seed)
            .unwrap();
    let maps: Vec<_> = maps.values().collect();
    let mut ok = true;
    for pair in maps.windows(2) {
        ok &= pair[0].pg.iter().zip(&pair[1].pg).all(|(a, b)| a <= b);
        ok &= empirical_cdf(pair[1])
            .unwrap()
            .dominates(&empirical_cdf(pair[0]).unwrap());
    }
    check(
        ok,
        "N_R = 1, 2, 4, 8, 16 maps are pointwise and stochastically ordered".to_string(),
    )
}

fn thread_count_replay() -> Outcome {
    let mut cfg = ScenarioConfig::default();
    cfg.evaluation.spacing_wavelength_frac = 0.25;
    let cmd = Command::Cdf {
        precoders: vec![Precoder::MrtFull, Precoder::BeamDiversity],
        n_realizations: vec![1, 4],
        outage: Some(0.01),
    };
    let runs: Vec<_> = [1, 2, 4]
        .iter()
        .map(|&t| run(&cfg, &cmd, t).unwrap().files)
        .collect();
    let plane = Command::Plane {
        precoder: Precoder::MrtFull,
        n_realizations: 1,
    };
    cfg.evaluation.spacing_wavelength_frac = 2.0;
    let planes: Vec<_> = [1, 3]
        .iter()
        .map(|&t| run(&cfg, &plane, t).unwrap().files)
        .collect();
    check(
        runs.windows(2).all(|w| w[0] == w[1]) && planes[0] == planes[1],
        format!(
            "{} artifacts byte-identical across 1, 2 and 4 threads",
            runs[0].len()
        ),
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("Friis oracle", friis_oracle()),
        ("Array-gain oracle", array_gain_oracle()),
        ("Headline PG", headline_path_gain()),
    ];

    let (vs_mrt, vs_single, elapsed) = margin_sweep();
    let m16 = median(vs_mrt);
    let m41 = median(vs_single);
    let limit = Duration::from_secs(600);
    results.push((
        "Margin reduction N_R=16 vs MRT",
        check(
            (m16 - 12.0).abs() <= 3.0 && elapsed <= limit,
            format!(
                "median {m16:.2} dB over 10 seeds (target 12 ± 3 dB); sweep {:.1} s",
                elapsed.as_secs_f64()
            ),
        ),
    ));
    results.push((
        "Repetition gain N_R=4 vs N_R=1",
        check(
            (m41 - 12.0).abs() <= 3.0 && elapsed <= limit,
            format!("median {m41:.2} dB over 10 seeds (target 12 ± 3 dB)"),
        ),
    ));
    results.push(("Standing-wave spacing", standing_wave_spacing()));
    results.push(("Property: MRT optimality", mrt_optimality()));
    results.push(("Property: matrix form vs path sum", matrix_vs_path_sum()));
    results.push((
        "Property: global phase invariance",
        global_phase_invariance(),
    ));
    results.push(("Property: mirror involution/isometry", mirror_properties()));
    results.push((
        "Property: prefix-max ECDF dominance",
        prefix_max_dominance(),
    ));
    results.push(("Property: thread-count replay", thread_count_replay()));

    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "[{}] {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    println!(
        "acceptance: {} passed, {} failed",
        results.len() - failed,
        failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
