//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`).

use areasim::analysis::{
    expected_walltimes, f_irr_bruteforce, f_irr_conventional, f_irr_structure_aware,
    max_quantile_probability, montecarlo_expected_max, montecarlo_max_tail_fraction,
    montecarlo_walltimes, xi_max, AccessModelParams, CycleTimeModel,
};
use areasim::engine::{proxy_matrix, run, sync_proxy, CostParams, RunOptions};
use areasim::model::{
    generate_benchmark, generate_heterogeneous, BenchmarkParams, DelayParams,
    HeterogeneityParams, NetworkSpec, TimeGrid,
};
use areasim::partition::{
    plan_round_robin, plan_structure_aware, plan_structure_aware_with_period, PartitionPlan,
};
use areasim::tables::Pathway;

const SEEDS: [u64; 3] = [12, 654, 91856];

fn check(criterion: &str, result: Result<(), String>) {
    match result {
        Ok(()) => println!("ACCEPTANCE {criterion}: PASS"),
        Err(msg) => {
            println!("ACCEPTANCE {criterion}: FAIL — {msg}");
            panic!("{criterion}: {msg}");
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// The shared random-network suite of criteria 1 and 2: 12 networks,
/// N <= 2000, 2-8 areas, D in {2, 5, 10}, mixed delay distributions.
fn equivalence_suite() -> Vec<(NetworkSpec, PartitionPlan, PartitionPlan)> {
    struct Cfg {
        areas: u32,
        per_area: u32,
        k_intra: u32,
        k_inter: u32,
        d_min: u32,
        ratio: u32,
        windows: u64,
        threads: u32,
        rate_hz: f64,
        seed: u64,
    }
    let cfgs = [
        Cfg { areas: 2, per_area: 150, k_intra: 3, k_inter: 2, d_min: 1, ratio: 2, windows: 6, threads: 2, rate_hz: 200.0, seed: 12 },
        Cfg { areas: 4, per_area: 100, k_intra: 2, k_inter: 2, d_min: 1, ratio: 5, windows: 4, threads: 1, rate_hz: 250.0, seed: 654 },
        Cfg { areas: 8, per_area: 60, k_intra: 4, k_inter: 3, d_min: 1, ratio: 10, windows: 3, threads: 2, rate_hz: 300.0, seed: 91856 },
        Cfg { areas: 3, per_area: 200, k_intra: 5, k_inter: 1, d_min: 2, ratio: 2, windows: 5, threads: 3, rate_hz: 150.0, seed: 7 },
        Cfg { areas: 6, per_area: 80, k_intra: 3, k_inter: 4, d_min: 2, ratio: 5, windows: 3, threads: 2, rate_hz: 100.0, seed: 8 },
        Cfg { areas: 5, per_area: 120, k_intra: 2, k_inter: 2, d_min: 1, ratio: 10, windows: 2, threads: 1, rate_hz: 400.0, seed: 9 },
        Cfg { areas: 8, per_area: 250, k_intra: 4, k_inter: 4, d_min: 1, ratio: 5, windows: 4, threads: 2, rate_hz: 120.0, seed: 10 },
        Cfg { areas: 2, per_area: 30, k_intra: 1, k_inter: 1, d_min: 3, ratio: 2, windows: 4, threads: 1, rate_hz: 500.0, seed: 11 },
        Cfg { areas: 4, per_area: 500, k_intra: 3, k_inter: 2, d_min: 1, ratio: 10, windows: 2, threads: 4, rate_hz: 80.0, seed: 13 },
        Cfg { areas: 8, per_area: 100, k_intra: 2, k_inter: 5, d_min: 1, ratio: 2, windows: 8, threads: 2, rate_hz: 250.0, seed: 14 },
        Cfg { areas: 3, per_area: 60, k_intra: 4, k_inter: 2, d_min: 2, ratio: 10, windows: 2, threads: 2, rate_hz: 200.0, seed: 15 },
        Cfg { areas: 5, per_area: 300, k_intra: 3, k_inter: 3, d_min: 1, ratio: 5, windows: 3, threads: 3, rate_hz: 100.0, seed: 16 },
    ];
    cfgs.iter()
        .map(|c| {
            let d_min_inter = c.d_min * c.ratio;
            let net = generate_benchmark(&BenchmarkParams {
                n_areas: c.areas,
                neurons_per_area: c.per_area,
                k_intra: c.k_intra,
                k_inter: c.k_inter,
                grid: TimeGrid {
                    h_steps_per_ms: 1,
                    d_min_steps: c.d_min,
                    d_min_inter_steps: d_min_inter,
                    t_model_steps: u64::from(d_min_inter) * c.windows,
                },
                intra_delay: DelayParams {
                    mean_ms: f64::from(c.d_min) * 1.8,
                    sd_ms: f64::from(c.d_min) * 0.9,
                },
                inter_delay: DelayParams {
                    mean_ms: f64::from(d_min_inter) * 1.4,
                    sd_ms: f64::from(d_min_inter) * 0.5,
                },
                rate_hz: c.rate_hz,
                rng_seed: c.seed,
            })
            .expect("suite parameters are valid");
            assert!(net.n_neurons() <= 2000);
            let conv = plan_round_robin(&net, c.areas, c.threads).unwrap();
            let struc = plan_structure_aware(&net, c.areas, c.threads).unwrap();
            (net, conv, struc)
        })
        .collect()
}

#[test]
fn criterion_01_cross_scheme_equivalence() {
    check("01 cross-scheme delivery equivalence", (|| {
        let opts = RunOptions {
            record_deliveries: true,
            ..RunOptions::default()
        };
        for (i, (net, conv, struc)) in equivalence_suite().iter().enumerate() {
            let out_conv = run(net, conv, &opts).map_err(|e| format!("net {i}: {e}"))?;
            let out_struc = run(net, struc, &opts).map_err(|e| format!("net {i}: {e}"))?;
            let d_conv = out_conv.deliveries.unwrap();
            let d_struc = out_struc.deliveries.unwrap();
            ensure(!d_conv.is_empty(), || format!("net {i} produced no deliveries"))?;
            ensure(d_conv == d_struc, || {
                format!(
                    "net {i}: multisets differ ({} vs {} records)",
                    d_conv.len(),
                    d_struc.len()
                )
            })?;
        }
        Ok(())
    })());
}

#[test]
fn criterion_02_exchange_count_law() {
    check("02 exchange-count law", (|| {
        for (i, (net, conv, struc)) in equivalence_suite().iter().enumerate() {
            let s = net.grid.n_cycles();
            let d = u64::from(net.grid.delay_ratio());
            let out_conv =
                run(net, conv, &RunOptions::default()).map_err(|e| format!("net {i}: {e}"))?;
            let out_struc =
                run(net, struc, &RunOptions::default()).map_err(|e| format!("net {i}: {e}"))?;
            ensure(out_conv.summary.n_global_exchanges == s, || {
                format!(
                    "net {i}: conventional made {} global exchanges, want S = {s}",
                    out_conv.summary.n_global_exchanges
                )
            })?;
            ensure(out_struc.summary.n_global_exchanges == s / d, || {
                format!(
                    "net {i}: structure-aware made {} global exchanges, want S/D = {}",
                    out_struc.summary.n_global_exchanges,
                    s / d
                )
            })?;
        }
        Ok(())
    })());
}

#[test]
fn criterion_03_access_model_reference_points() {
    check("03 irregular-access reduction reference points", (|| {
        let cases = [
            (32u64, 48u64, 0.12),
            (32, 128, 0.29),
            (128, 48, 0.37),
            (128, 128, 0.43),
        ];
        for (m, t_m, want) in cases {
            let p = AccessModelParams::from_per_rank(m, t_m, 130_000, 3_000, 3_000);
            let conv = f_irr_conventional(&p).map_err(|e| e.to_string())?;
            let struc = f_irr_structure_aware(&p).map_err(|e| e.to_string())?;
            let reduction = 1.0 - struc / conv;
            ensure((reduction - want).abs() <= 0.02, || {
                format!("M={m} T_M={t_m}: reduction {reduction:.4} not within 2pp of {want}")
            })?;
        }
        Ok(())
    })());
}

#[test]
fn criterion_04_access_oracle() {
    check("04 brute-force access oracle", (|| {
        let m = 4u32;
        let t_m = 2u32;
        let per_area = 1024u32; // N = 4096
        let k = 64u32;
        for seed in SEEDS {
            let mut net = generate_benchmark(&BenchmarkParams {
                n_areas: m,
                neurons_per_area: per_area,
                k_intra: k / 2,
                k_inter: k / 2,
                grid: TimeGrid {
                    h_steps_per_ms: 1,
                    d_min_steps: 1,
                    d_min_inter_steps: 5,
                    t_model_steps: 30,
                },
                intra_delay: DelayParams {
                    mean_ms: 2.0,
                    sd_ms: 0.5,
                },
                inter_delay: DelayParams {
                    mean_ms: 7.0,
                    sd_ms: 1.0,
                },
                rate_hz: 1.0,
                rng_seed: seed,
            })
            .map_err(|e| e.to_string())?;
            // One synchronized spike per neuron at step 0; every arrival
            // lands inside the run, so engine counters must be exact.
            ensure(
                u64::from(net.max_delay_steps()) < net.grid.t_model_steps,
                || "delays exceed the run length; one-spike construction broken".to_owned(),
            )?;
            for n in &mut net.neurons {
                n.fire_interval_steps = std::num::NonZeroU64::new(net.grid.t_model_steps);
                n.fire_phase_steps = 0;
            }

            let params =
                AccessModelParams::from_per_rank(u64::from(m), u64::from(t_m), u64::from(per_area), u64::from(k / 2), u64::from(k / 2));
            let plans = [
                (plan_round_robin(&net, m, t_m).unwrap(), f_irr_conventional(&params)),
                (plan_structure_aware(&net, m, t_m).unwrap(), f_irr_structure_aware(&params)),
            ];
            for (plan, analytic) in plans {
                let analytic = analytic.map_err(|e| e.to_string())?;
                let bf = f_irr_bruteforce(&net, &plan);
                let f_bf = bf.f_combined();
                ensure((f_bf - analytic).abs() / analytic < 0.05, || {
                    format!(
                        "seed {seed} {:?}: brute force {f_bf:.5} vs analytic {analytic:.5}",
                        plan.scheme
                    )
                })?;

                let out = run(&net, &plan, &RunOptions::default())
                    .map_err(|e| e.to_string())?;
                ensure(out.summary.total_irregular == bf.groups, || {
                    format!(
                        "seed {seed} {:?}: engine irregular {:?} != brute-force groups {:?}",
                        plan.scheme, out.summary.total_irregular, bf.groups
                    )
                })?;
                ensure(out.summary.total_deliveries == bf.synapses, || {
                    format!(
                        "seed {seed} {:?}: engine deliveries {:?} != synapse counts {:?}",
                        plan.scheme, out.summary.total_deliveries, bf.synapses
                    )
                })?;
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_05_sync_ratio_theory_and_oracle() {
    check("05 sync ratio 1/sqrt(D)", (|| {
        let model = CycleTimeModel {
            mu: 1.0,
            sigma: 0.15,
            m: 128,
            s: 10_000,
            d: 10,
            rho: 0.0,
        };
        let cf = expected_walltimes(&model).map_err(|e| e.to_string())?;
        let want = 1.0 / 10f64.sqrt();
        ensure((cf.sync_ratio - want).abs() < 1e-15, || {
            format!("closed form ratio {} != 1/sqrt(10)", cf.sync_ratio)
        })?;
        // 68.4% synchronization-time reduction at D = 10.
        ensure((1.0 - cf.sync_ratio - 0.684).abs() < 0.001, || {
            format!("reduction {} not 68.4%", 1.0 - cf.sync_ratio)
        })?;
        let mc = montecarlo_walltimes(&model, 20, 12).map_err(|e| e.to_string())?;
        ensure((mc.sync_ratio - want).abs() / want < 0.05, || {
            format!("Monte-Carlo ratio {} strays >5% from {want}", mc.sync_ratio)
        })?;
        Ok(())
    })());
}

#[test]
fn criterion_06_max_quantile_probability() {
    check("06 max-quantile tail probability", (|| {
        let analytic = max_quantile_probability(0.035, 128);
        ensure((analytic - 0.9895).abs() <= 0.0001, || {
            format!("1-(1-0.035)^128 = {analytic}, want 0.9895 +- 0.0001")
        })?;
        let empirical = montecarlo_max_tail_fraction(0.035, 128, 100_000, 654);
        ensure((empirical - analytic).abs() / analytic < 0.01, || {
            format!("empirical fraction {empirical} strays >1% from {analytic}")
        })?;
        Ok(())
    })());
}

#[test]
fn criterion_07_blom_factor() {
    check("07 Blom xi_M vs Monte Carlo", (|| {
        ensure(xi_max(1) == 0.0, || "xi_1 must be exactly 0".to_owned())?;
        let xi = xi_max(128);
        let mc = montecarlo_expected_max(128, 1_000_000, 91856);
        ensure((xi - mc).abs() / mc < 0.02, || {
            format!("xi_128 = {xi} vs Monte-Carlo {mc}: >2% apart")
        })?;
        Ok(())
    })());
}

#[test]
fn criterion_08_serial_correlation_degradation() {
    check("08 AR(1) CV-ratio degradation", (|| {
        let model = CycleTimeModel {
            mu: 1.0,
            sigma: 0.1,
            m: 16,
            s: 2_000,
            d: 10,
            rho: 0.9,
        };
        let mc = montecarlo_walltimes(&model, 40, 12).map_err(|e| e.to_string())?;
        let bound = 1.0 / 10f64.sqrt();
        let exceed = mc
            .replicates
            .iter()
            .filter(|r| r.cv_struc / r.cv_conv > bound)
            .count();
        let frac = exceed as f64 / mc.replicates.len() as f64;
        ensure(frac >= 0.95, || {
            format!("CV ratio above 1/sqrt(D) in only {frac:.2} of replicates")
        })?;
        Ok(())
    })());
}

#[test]
fn criterion_09_buffer_resize_protocol() {
    check("09 buffer-resize zero loss", (|| {
        let mut net = generate_benchmark(&BenchmarkParams {
            n_areas: 3,
            neurons_per_area: 20,
            k_intra: 3,
            k_inter: 3,
            grid: TimeGrid {
                h_steps_per_ms: 1,
                d_min_steps: 1,
                d_min_inter_steps: 10,
                t_model_steps: 50,
            },
            intra_delay: DelayParams {
                mean_ms: 2.0,
                sd_ms: 1.0,
            },
            inter_delay: DelayParams {
                mean_ms: 12.0,
                sd_ms: 2.0,
            },
            rate_hz: 100.0,
            rng_seed: 12,
        })
        .map_err(|e| e.to_string())?;
        // Burst load: every neuron fires every step.
        for n in &mut net.neurons {
            n.fire_interval_steps = std::num::NonZeroU64::new(1);
            n.fire_phase_steps = 0;
        }
        // Independent expectation: every (synapse, emission) pair whose
        // arrival precedes the run end must be delivered.
        let expected: u64 = net
            .synapses
            .iter()
            .map(|s| net.grid.t_model_steps - u64::from(s.delay_steps))
            .sum();

        for plan in [
            plan_round_robin(&net, 3, 2).unwrap(),
            plan_structure_aware(&net, 3, 2).unwrap(),
        ] {
            let out = run(
                &net,
                &plan,
                &RunOptions {
                    initial_capacity: 2,
                    ..RunOptions::default()
                },
            )
            .map_err(|e| e.to_string())?;
            ensure(out.summary.n_resize_rounds >= 1, || {
                format!("{:?}: no resize round recorded", plan.scheme)
            })?;
            let delivered: u64 = out.summary.total_deliveries.iter().sum();
            ensure(delivered == expected, || {
                format!(
                    "{:?}: delivered {delivered}, want {expected} — spikes lost",
                    plan.scheme
                )
            })?;
            // Sent equals received: every collocated entry reaches a
            // receive buffer (exchange events account all of them).
            let sent: u64 = out.exchanges.iter().map(|e| e.entries).sum();
            let collocated: u64 = out.summary.total_collocated.iter().sum();
            ensure(sent == collocated, || {
                format!(
                    "{:?}: {collocated} entries collocated but {sent} exchanged",
                    plan.scheme
                )
            })?;
        }
        Ok(())
    })());
}

#[test]
fn criterion_10_heterogeneity_trends() {
    check("10 heterogeneity and D-sweep trends", (|| {
        let base = BenchmarkParams {
            n_areas: 8,
            neurons_per_area: 250,
            k_intra: 4,
            k_inter: 4,
            grid: TimeGrid {
                h_steps_per_ms: 1,
                d_min_steps: 1,
                d_min_inter_steps: 10,
                t_model_steps: 500,
            },
            intra_delay: DelayParams {
                mean_ms: 1.8,
                sd_ms: 0.9,
            },
            inter_delay: DelayParams {
                mean_ms: 14.0,
                sd_ms: 5.0,
            },
            rate_hz: 100.0,
            rng_seed: 0,
        };
        let costs = CostParams::default();

        // Heterogeneity trend: seed-averaged sync proxy nondecreasing in
        // the area-size CV.
        let mut last = f64::NEG_INFINITY;
        for cv in [0.0, 0.1, 0.2, 0.3] {
            let mut acc = 0.0;
            for seed in SEEDS {
                let mut p = base.clone();
                p.rng_seed = seed;
                let net = generate_heterogeneous(
                    &p,
                    &HeterogeneityParams {
                        cv_area_size: cv,
                        cv_rate: 0.0,
                    },
                )
                .map_err(|e| e.to_string())?;
                let plan = plan_structure_aware(&net, 8, 2).unwrap();
                let out = run(&net, &plan, &RunOptions::default())
                    .map_err(|e| e.to_string())?;
                let matrix = proxy_matrix(&out, &costs);
                acc += sync_proxy(&matrix, plan.exchange_period);
            }
            let mean = acc / SEEDS.len() as f64;
            ensure(mean >= last, || {
                format!("sync proxy fell from {last} to {mean} at cv {cv}")
            })?;
            last = mean;
        }

        // Exchange-period trend: lumping to D = 10 at least halves the
        // sync proxy relative to per-cycle exchanges.
        let mut ratio_acc = 0.0;
        for seed in SEEDS {
            let mut p = base.clone();
            p.rng_seed = seed;
            let net = generate_benchmark(&p).map_err(|e| e.to_string())?;
            let sync_at = |period: u32| -> Result<f64, String> {
                let plan =
                    plan_structure_aware_with_period(&net, 8, 2, period).unwrap();
                let out =
                    run(&net, &plan, &RunOptions::default()).map_err(|e| e.to_string())?;
                Ok(sync_proxy(&proxy_matrix(&out, &costs), period))
            };
            let s1 = sync_at(1)?;
            let s10 = sync_at(10)?;
            ratio_acc += s10 / s1;
        }
        let ratio = ratio_acc / SEEDS.len() as f64;
        ensure(ratio <= 0.5, || {
            format!("sync proxy at D=10 is {ratio:.3} of D=1, want <= 0.5")
        })?;
        Ok(())
    })());
}

#[test]
fn criterion_runtime_sanity() {
    // Not a numbered criterion: guards the suite's own hygiene. Pathway
    // bucket names used in the CSVs stay stable.
    assert_eq!(Pathway::Short.as_str(), "short");
    assert_eq!(Pathway::Long.as_str(), "long");
}
