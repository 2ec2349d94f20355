//! Median headline path gain and fading-margin reductions over scatterer seeds.
//!
//! `cargo run --release --example seed_sweep -- [config.toml] [n_seeds]`

use std::collections::BTreeMap;

use nfwpt::cli::strategy_key;
use nfwpt::evaluation::{
    beam_diversity_prefix_maps, empirical_cdf, fading_margin, strategy_map, to_db,
};
use nfwpt::{Precoder, ScenarioConfig};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let base = match args.get(1) {
        Some(p) if p != "-" => ScenarioConfig::load(p.as_ref())?,
        _ => ScenarioConfig::default(),
    };
    let n_seeds: u64 = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(10);
    let target = base.device_position();
    let (mut headline, mut vs_mrt, mut vs_one) = (Vec::new(), Vec::new(), Vec::new());
    for seed in 1..=n_seeds {
        let cfg = ScenarioConfig {
            seed,
            ..base.clone()
        };
        let sc = cfg.build(0)?;
        let w = sc.precoder_weights(Precoder::MrtFull, target)?;
        let pg = to_db(sc.path_gain(&w, target)?);
        let domain = cfg.disc_domain();
        let mut cdfs = BTreeMap::new();
        let mrt = strategy_map(&sc, Precoder::MrtFull, target, &domain, 1, seed)?;
        cdfs.insert("mrt-full".to_string(), empirical_cdf(&mrt)?);
        for (n, m) in beam_diversity_prefix_maps(&sc, target, &domain, &[1, 4, 16], seed)? {
            cdfs.insert(strategy_key(Precoder::BeamDiversity, n), empirical_cdf(&m)?);
        }
        let rep = fading_margin(&cdfs, base.evaluation.outage, "mrt-full")?;
        let r16 = rep.entry("beam-diversity-nr16").unwrap().reduction_db;
        let r41 = rep.entry("beam-diversity-nr4").unwrap().pg_at_outage_db
            - rep.entry("beam-diversity-nr1").unwrap().pg_at_outage_db;
        println!(
            "seed {seed:3}  N_sc {:3}  PG(p_EN) {pg:7.2} dB  nr16-mrt {r16:6.2} dB  nr4-nr1 {r41:6.2} dB",
            sc.field().len()
        );
        headline.push(pg);
        vs_mrt.push(r16);
        vs_one.push(r41);
    }
    println!(
        "median: PG {:.2} dB, nr16 vs mrt {:.2} dB, nr4 vs nr1 {:.2} dB",
        median(headline),
        median(vs_mrt),
        median(vs_one)
    );
    Ok(())
}
