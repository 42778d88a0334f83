use mmfree::amdahl::{self, curves_for_fraction};
use mmfree::hardware::{builtin_hardware, Dataflow, HardwareConfig};
use mmfree::model_zoo::{builtin_models, enumerate_block_ops, find_model, opt_models, Role, Shape};
use mmfree::report::{self, analyze_block, MemoryMetric, Metric, DEFAULT_SEQLENS};
use mmfree::systolic_cost::{cost_is, cost_os, cost_ws};

fn report(model: &str, l: u64, hw: &HardwareConfig) -> mmfree::FractionReport {
    analyze_block(&find_model(model).unwrap(), l, hw, MemoryMetric::default()).unwrap()
}

#[test]
fn census_holds_for_every_model() {
    for model in builtin_models() {
        for l in [128, 1000, 4096] {
            let ops = enumerate_block_ops(&model, l).unwrap();
            let h = model.h() as usize;
            assert_eq!(ops.len(), 2 * h + 6);
            assert_eq!(ops.iter().filter(|o| o.quantizable()).count(), 6);
            assert!(ops.iter().all(|o| o.n() == 1 && o.m() >= 1 && o.k() >= 1));
            let proj_macs: u64 = ops
                .iter()
                .filter(|o| o.quantizable())
                .map(|o| o.shape.macs())
                .sum();
            let attn_macs: u64 = ops
                .iter()
                .filter(|o| !o.quantizable())
                .map(|o| o.shape.macs())
                .sum();
            assert_eq!(
                proj_macs,
                4 * model.d() * model.d() + 2 * model.d() * model.d_ff()
            );
            assert_eq!(attn_macs, 2 * model.h() * l * model.head_dim());
            assert_eq!(ops, enumerate_block_ops(&model, l).unwrap());
        }
    }
}

#[test]
fn input_stationary_vs_output_stationary_per_op() {
    // IS wins only on the score products on the 256-wide array, where the
    // whole head dimension fits in one column fold; OS still wins the block.
    let mut is_wins = 0;
    for hw in builtin_hardware() {
        let os = hw.clone().with_dataflow(Dataflow::Os);
        let is = hw.clone().with_dataflow(Dataflow::Is);
        for model in builtin_models() {
            for l in [128, 4096] {
                for op in enumerate_block_ops(&model, l).unwrap() {
                    let a = cost_os(op.shape, &os).unwrap().compute_cycles;
                    let b = cost_is(op.shape, &is).unwrap().compute_cycles;
                    if hw.name == "cloud" && op.role == Role::ScoreQK {
                        is_wins += u32::from(b < a);
                    } else {
                        assert!(
                            b >= a,
                            "{} {} on {}: IS {b} < OS {a}",
                            model.name(),
                            op.shape,
                            hw.name
                        );
                    }
                }
            }
        }
    }
    assert!(is_wins > 0);
    let cloud = HardwareConfig::cloud();
    let s = Shape::new(128, 64, 1);
    assert_eq!(cost_os(s, &cloud).unwrap().compute_cycles, 319);
    assert_eq!(
        cost_is(s, &cloud.with_dataflow(Dataflow::Is))
            .unwrap()
            .compute_cycles,
        255
    );
}

#[test]
fn degenerate_op_costs_two_cycles_everywhere() {
    let s = Shape::new(1, 1, 1);
    for hw in builtin_hardware() {
        assert_eq!(
            cost_os(s, &hw.clone().with_dataflow(Dataflow::Os))
                .unwrap()
                .compute_cycles,
            2
        );
        assert_eq!(
            cost_ws(s, &hw.clone().with_dataflow(Dataflow::Ws))
                .unwrap()
                .compute_cycles,
            2
        );
        assert_eq!(
            cost_is(s, &hw.clone().with_dataflow(Dataflow::Is))
                .unwrap()
                .compute_cycles,
            2
        );
    }
}

#[test]
fn cloud_point_values() {
    let cloud = HardwareConfig::cloud();
    assert!((report("opt-350m", 2048, &cloud).f_compute - 0.371).abs() <= 0.10);
    assert!((report("opt-1.3b", 2048, &cloud).f_compute - 0.50).abs() <= 0.10);
    assert!((report("opt-6.7b", 4096, &cloud).f_compute - 0.645).abs() <= 0.10);
    assert!((report("opt-13b", 4096, &cloud).f_compute - 0.69).abs() <= 0.10);
}

#[test]
fn fractions_strictly_inside_unit_interval() {
    for hw in builtin_hardware() {
        for model in builtin_models() {
            for l in DEFAULT_SEQLENS {
                let r = analyze_block(&model, l, &hw, MemoryMetric::default()).unwrap();
                assert!(r.f_compute > 0.0 && r.f_compute < 1.0);
                assert!(r.f_memory > 0.0 && r.f_memory < 1.0);
            }
        }
    }
}

#[test]
fn memory_dominates_compute_on_cloud() {
    let cloud = HardwareConfig::cloud();
    let models = opt_models();
    let c = report::sweep(
        &models,
        &DEFAULT_SEQLENS,
        &cloud,
        Metric::Compute,
        MemoryMetric::default(),
    )
    .unwrap();
    let m = report::sweep(
        &models,
        &DEFAULT_SEQLENS,
        &cloud,
        Metric::Memory,
        MemoryMetric::default(),
    )
    .unwrap();
    assert!(report::memory_below_compute(&c, &m).is_empty());
}

#[test]
fn edge_grid_mostly_matmul_free() {
    let edge = HardwareConfig::edge();
    let grid = report::sweep(
        &opt_models(),
        &DEFAULT_SEQLENS,
        &edge,
        Metric::Compute,
        MemoryMetric::default(),
    )
    .unwrap();
    for (r, &l) in grid.seqlens.iter().enumerate() {
        for (c, model) in grid.models.iter().enumerate() {
            if (l, model.as_str()) != (4096, "opt-350m") {
                assert!(grid.cells[r][c] > 0.5, "{model}@{l}");
            }
        }
    }
    let f = grid.get(4096, "opt-350m").unwrap();
    assert!((0.40..=0.60).contains(&f));
}

#[test]
fn small_arrays_shift_work_toward_projections() {
    for model in opt_models() {
        let cloud = analyze_block(
            &model,
            2048,
            &HardwareConfig::cloud(),
            MemoryMetric::default(),
        )
        .unwrap();
        let edge = analyze_block(
            &model,
            2048,
            &HardwareConfig::edge(),
            MemoryMetric::default(),
        )
        .unwrap();
        assert!(edge.f_compute > cloud.f_compute, "{}", model.name());
    }
}

#[test]
fn amdahl_takeaways() {
    let cloud = HardwareConfig::cloud();
    let big = report("opt-66b", 2048, &cloud);
    let (p, a) = amdahl::curves(&big, Metric::Compute, 100).unwrap();
    assert!(p.last().unwrap().s_total > 5.0 * a.last().unwrap().s_total);

    let small = report("opt-350m", 2048, &cloud);
    let (p, a) = amdahl::curves(&small, Metric::Compute, 100).unwrap();
    assert!(a.asymptote() > p.asymptote());

    let (p, a) = amdahl::curves(&small, Metric::Memory, 1).unwrap();
    assert_eq!(p.samples.len(), 1);
    assert_eq!((p.samples[0].s_partial, p.samples[0].s_total), (1.0, 1.0));
    assert_eq!((a.samples[0].s_partial, a.samples[0].s_total), (1.0, 1.0));
}

#[test]
fn curve_invariants() {
    for f in [0.04, 0.23, 0.5, 0.881, 0.96] {
        let (p, a) = curves_for_fraction(f, 100).unwrap();
        for c in [&p, &a] {
            assert_eq!(c.samples.len(), 100);
            for w in c.samples.windows(2) {
                assert!(w[0].s_partial < w[1].s_partial);
                assert!(w[0].s_total <= w[1].s_total);
            }
            assert!(c.samples.iter().all(|s| s.s_total <= c.asymptote()));
        }
    }
}

#[test]
fn reruns_are_bit_identical() {
    let edge = HardwareConfig::edge();
    let a = report::sweep(
        &builtin_models(),
        &[128, 4096],
        &edge,
        Metric::Memory,
        MemoryMetric::DramBytes,
    )
    .unwrap();
    let b = report::sweep(
        &builtin_models(),
        &[128, 4096],
        &edge,
        Metric::Memory,
        MemoryMetric::DramBytes,
    )
    .unwrap();
    assert_eq!(a, b);
}
