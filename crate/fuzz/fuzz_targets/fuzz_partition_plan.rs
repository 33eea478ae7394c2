#![no_main]

use std::sync::OnceLock;

use areasim::engine::{run, RunOptions};
use areasim::model::{
    generate_benchmark, BenchmarkParams, DelayParams, NetworkSpec, TimeGrid,
};
use areasim::partition::PartitionPlan;
use areasim::tables::build_tables;
use libfuzzer_sys::fuzz_target;

static NET: OnceLock<NetworkSpec> = OnceLock::new();

fn net() -> &'static NetworkSpec {
    NET.get_or_init(|| {
        generate_benchmark(&BenchmarkParams {
            n_areas: 2,
            neurons_per_area: 8,
            k_intra: 2,
            k_inter: 1,
            grid: TimeGrid {
                h_steps_per_ms: 1,
                d_min_steps: 1,
                d_min_inter_steps: 4,
                t_model_steps: 8,
            },
            intra_delay: DelayParams {
                mean_ms: 1.5,
                sd_ms: 0.5,
            },
            inter_delay: DelayParams {
                mean_ms: 5.0,
                sd_ms: 1.0,
            },
            rate_hz: 250.0,
            rng_seed: 12,
        })
        .expect("fixed harness network is valid")
    })
}

// Plans arrive as documents too. Parsing and validation against a fixed
// network must never panic, and any plan that validates must carry the
// whole pipeline: table construction, a short run, and the delivery
// conservation law.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let net = net();
    if let Ok(plan) = PartitionPlan::from_json(text, net) {
        let json = plan.to_json().expect("valid plan serializes");
        let back = PartitionPlan::from_json(&json, net).expect("round trip stays valid");
        assert_eq!(plan, back);

        build_tables(net, &plan).expect("validated plan builds tables");
        let output = run(net, &plan, &RunOptions::default()).expect("validated plan runs");
        let delivered: u64 = output.summary.total_deliveries.iter().sum();
        assert_eq!(output.summary.total_applied, delivered);
    }
});
