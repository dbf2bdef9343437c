use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use parapos_core::duhamel::{duhamel_apply, KernelConfig};
use parapos_core::fdm::step;
use parapos_core::hypothesis::{check_all, AssumptionId, CheckConfig, SampleBudget};
use parapos_core::model::ProblemSpec;
use parapos_core::par::ExecPolicy;
use parapos_core::scenario::builtin;

const POLICIES: [(&str, ExecPolicy); 2] = [("sequential", ExecPolicy::Sequential), ("parallel", ExecPolicy::Parallel)];

fn problem(name: &str, nodes: Vec<usize>) -> (ProblemSpec, parapos_core::fdm::SchemeConfig) {
    let mut cfg = builtin(name).unwrap();
    cfg.problem.grid.nodes = Some(nodes);
    (cfg.build_problem(Path::new(""), 0).unwrap(), cfg.scheme)
}

fn fdm_step_2d(c: &mut Criterion) {
    let (spec, scheme) = problem("S2_maxbound", vec![101, 101]);
    let mut group = c.benchmark_group("fdm_step_2d_101");
    group.sample_size(20);
    for (label, exec) in POLICIES {
        let scheme = parapos_core::fdm::SchemeConfig { exec, ..scheme.clone() };
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| step(spec.initial(), 0.0, scheme.dt, &spec, &scheme).unwrap())
        });
    }
    group.finish();
}

fn duhamel_convolution(c: &mut Criterion) {
    let (spec, _) = problem("S6_oracle_crosscheck", vec![801]);
    let mut group = c.benchmark_group("duhamel_apply_801");
    group.sample_size(20);
    for (label, exec) in POLICIES {
        let mut kc = KernelConfig::for_spec(&spec).unwrap();
        kc.exec = exec;
        let history = vec![(0.0, spec.initial().clone()), (0.25, spec.initial().clone())];
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| duhamel_apply(spec.initial(), &history, 0.25, &kc).unwrap())
        });
    }
    group.finish();
}

fn checker_sweep(c: &mut Criterion) {
    let (spec, _) = problem("S2_maxbound", vec![41, 41]);
    let budget = SampleBudget { t_points: 6, x_points: 8, u_points: 10, p_points: 3, ..SampleBudget::default() };
    let assumptions = vec![AssumptionId::A1, AssumptionId::A2Prime, AssumptionId::A5, AssumptionId::A7a];
    let mut group = c.benchmark_group("checker_sweep");
    group.sample_size(10);
    for (label, exec) in POLICIES {
        let mut cc = CheckConfig::new(budget.clone(), assumptions.clone());
        cc.exec = exec;
        group.bench_function(BenchmarkId::from_parameter(label), |b| b.iter(|| check_all(&spec, &cc).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, fdm_step_2d, duhamel_convolution, checker_sweep);
criterion_main!(benches);
