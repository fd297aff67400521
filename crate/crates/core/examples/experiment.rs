//! Semi-supervised gain on a synthetic task: supervised baseline versus
//! three TRS variants, per seed.
//!
//! usage: experiment [seeds] [key=value ...]

use std::time::Instant;

use trs_core::data::{synthesize, SyntheticSpec};
use trs_core::eval::evaluate;
use trs_core::training::{train, train_supervised, ComponentToggles, TrainConfig};

fn main() -> trs_core::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seeds: u64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(1);
    let mut base = TrainConfig::default();
    let mut noise = 0.5;
    let mut n_test = 200;
    let mut only: Option<String> = None;
    for kv in args.iter().skip(1) {
        let (k, v) = kv.split_once('=').expect("key=value");
        match k {
            "noise" => noise = v.parse().unwrap(),
            "n_test" => n_test = v.parse().unwrap(),
            "only" => only = Some(v.to_string()),
            _ => base.set(k, v)?,
        }
    }
    let variants = [
        ("Base", ComponentToggles::NONE),
        ("Base+RN", ComponentToggles { reference_network: true, ..ComponentToggles::NONE }),
        ("full", ComponentToggles::ALL),
    ];
    let mut sums = [0.0; 4];
    for seed in 0..seeds {
        let split = synthesize(
            &SyntheticSpec {
                num_samples: 400,
                seq_len: 10,
                feat_dim: 64,
                label_fraction: 0.1,
                noise_std: noise,
                seed,
            },
            n_test,
        )?;
        let (labeled, unlabeled) = split.train.partition();
        let mut cfg = base.clone();
        cfg.seed = seed;
        let t0 = Instant::now();
        let sup = train_supervised(&cfg, &labeled, None)?;
        let r = evaluate(&sup.params, &sup.network, &split.test)?.spearman;
        print!("seed {seed}: supervised {r:.4} ({:.1}s)", t0.elapsed().as_secs_f64());
        sums[0] += r;
        for (i, (name, toggles)) in variants.iter().enumerate() {
            if only.as_deref().is_some_and(|o| !o.split(',').any(|x| x == *name)) {
                continue;
            }
            cfg.toggles = *toggles;
            let t0 = Instant::now();
            let out = train(&cfg, &labeled, &unlabeled, None)?;
            let r = evaluate(&out.theta_s, &out.network, &split.test)?.spearman;
            print!("  {name} {r:.4} ({:.1}s)", t0.elapsed().as_secs_f64());
            sums[i + 1] += r;
        }
        println!();
        use std::io::Write as _;
        std::io::stdout().flush().ok();
    }
    let n = seeds as f64;
    println!(
        "mean: supervised {:.4} Base {:.4} Base+RN {:.4} full {:.4}",
        sums[0] / n,
        sums[1] / n,
        sums[2] / n,
        sums[3] / n
    );
    Ok(())
}
