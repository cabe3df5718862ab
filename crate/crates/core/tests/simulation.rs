use nhat::cli::preset_simulations;
use nhat::procedures::{replicate_runs, summarize};
use nhat::{
    k_two_stage, replicate, run_sequential, run_two_stage, ModelParams, PrecisionSpec, Procedure,
    ProcedureConfig, RngSeed, TwoStageMode,
};

fn config(
    (n, p, m): (u64, f64, u64),
    k1: u64,
    gamma: f64,
    procedure: Procedure,
    replicas: u64,
    seed: u64,
) -> ProcedureConfig {
    ProcedureConfig::new(
        ModelParams::new(n, p, m).unwrap(),
        k1,
        PrecisionSpec::new(gamma).unwrap(),
        procedure,
        replicas,
        seed,
    )
    .unwrap()
}

#[test]
fn sequential_stops_only_when_the_rule_holds() {
    for cfg in preset_simulations(5, 3).unwrap() {
        let mut cfg = cfg;
        cfg.replicas = 200;
        for run in replicate_runs(&cfg).unwrap() {
            let run = run.unwrap();
            assert!(run.k_final >= cfg.k1);
            assert!(run.k_final > run.k_final_requirement);
            if run.k_final > cfg.k1 {
                assert!(run.k_pilot_requirement >= cfg.k1);
            }
        }
    }
}

#[test]
fn sequential_means_are_unbiased_on_every_row() {
    for cfg in preset_simulations(5, 11).unwrap() {
        let s = replicate(&cfg).unwrap();
        let n = cfg.params.n_true as f64;
        let se = s.std_n_hat.unwrap() / (cfg.replicas as f64).sqrt();
        assert!((s.mean_n_hat - n).abs() < 4.0 * se, "{:?}: {}", cfg.params, s.mean_n_hat);
        assert_eq!(s.aborted, 0);
    }
}

#[test]
fn sequential_is_less_variable_than_two_stage() {
    let mut wins = 0;
    for meta in 0..20u64 {
        let configs = preset_simulations(4, 1_000 + meta).unwrap();
        let two = replicate(&configs[0]).unwrap();
        let seq = replicate(&configs[1]).unwrap();
        if seq.std_k.unwrap() < two.std_k.unwrap() {
            wins += 1;
        }
    }
    assert!(wins >= 19, "{wins} of 20");
}

#[test]
fn sequential_quantiles_sit_inside_two_stage_quantiles() {
    let configs = preset_simulations(4, 5).unwrap();
    let two = replicate(&configs[0]).unwrap();
    let seq = replicate(&configs[1]).unwrap();
    assert!(two.q025_k < seq.q025_k && seq.q975_k < two.q975_k);
}

#[test]
fn augment_mode_has_the_same_mean_size() {
    let cfg = config((500, 0.6, 10), 100, 0.01, Procedure::TwoStage, 1000, 8);
    let s = replicate(&cfg).unwrap();
    assert!((s.mean_k - 1653.0).abs() < 10.0, "{}", s.mean_k);
}

#[test]
fn summaries_are_deterministic() {
    let cfg = config((100, 0.4, 10), 100, 0.05, Procedure::Sequential, 300, 99);
    let a = replicate(&cfg).unwrap();
    let b = replicate(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.mean_k.to_bits(), b.mean_k.to_bits());

    let mut rng = RngSeed::new(4, 0).rng();
    let first = run_two_stage(&cfg, &mut rng).unwrap();
    let mut rng = RngSeed::new(4, 0).rng();
    assert_eq!(first, run_two_stage(&cfg, &mut rng).unwrap());
}

#[test]
fn single_replica_summary() {
    let cfg = config((500, 0.6, 10), 100, 0.05, Procedure::Sequential, 1, 2);
    let s = replicate(&cfg).unwrap();
    assert_eq!(s.std_k, None);
    assert_eq!(s.q025_k, s.mean_k);
    assert_eq!(s.q975_k, s.mean_k);
}

#[test]
fn loose_precision_stops_at_the_pilot() {
    // At typical pilot means the requirement is far below K₁.
    assert!(k_two_stage(300.0, 50.0 / 3.0, 10, 0.5).unwrap() < 100);
    for procedure in [Procedure::TwoStage, Procedure::Sequential] {
        let cfg = config((500, 0.6, 10), 100, 0.5, procedure, 50, 1);
        for run in replicate_runs(&cfg).unwrap() {
            assert_eq!(run.unwrap().k_final, 100);
        }
    }
}

#[test]
fn resample_mode_uses_exactly_the_requirement() {
    let cfg = config((500, 0.6, 10), 100, 0.01, Procedure::TwoStage, 1, 1)
        .with_two_stage_mode(TwoStageMode::Resample);
    for stream in 0..20 {
        let mut rng = RngSeed::new(13, stream).rng();
        let run = run_two_stage(&cfg, &mut rng).unwrap();
        assert_eq!(run.k_final, run.k_pilot_requirement.max(100));
    }
}

#[test]
fn runaway_cap_aborts_and_too_many_aborts_fail_the_summary() {
    let cfg = config((500, 0.6, 10), 100, 0.01, Procedure::Sequential, 20, 1).with_max_k(200);
    let mut rng = RngSeed::new(1, 0).rng();
    assert!(matches!(
        run_sequential(&cfg, &mut rng),
        Err(nhat::Error::RunawayStoppingRule { cap: 200 })
    ));
    let runs = replicate_runs(&cfg).unwrap();
    assert!(matches!(
        summarize(cfg.replicas, &runs),
        Err(nhat::Error::TooManyAborts { aborted: 20, replicas: 20, .. })
    ));
}

#[test]
fn tiny_p_exhausts_pilot_redraws() {
    let cfg = config((1, 1e-9, 1), 2, 0.1, Procedure::TwoStage, 1, 1);
    let mut rng = RngSeed::new(1, 0).rng();
    assert!(matches!(
        run_two_stage(&cfg, &mut rng),
        Err(nhat::Error::DegeneratePilot { redraws: 100 })
    ));
}
