use circuitforge::ledger::LoanKind;
use circuitforge::medici::{
    calibrate_model3, canonical_targets, reconstruct_dataset, Constraints, REPORTED_SHARE,
};
use circuitforge::par::{self, Exec};
use circuitforge::policy::{classify_chain, BorrowerType, LoanGraph, LoanNode};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn reconstruction(c: &mut Criterion) {
    let constraints = Constraints::canonical();
    let seeds: Vec<u64> = (0..16).collect();
    let mut g = c.benchmark_group("reconstruct_16_seeds");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                par::map(exec, &seeds, |&s| {
                    reconstruct_dataset(&constraints, s, Exec::Sequential)
                        .unwrap()
                        .moves
                })
            })
        });
    }
    g.finish();
}

fn calibration(c: &mut Criterion) {
    let targets = canonical_targets();
    let retentions: Vec<f64> = (1..=12).map(|i| f64::from(i) * 0.01).collect();
    let multiples: Vec<f64> = (1..=8).map(f64::from).collect();
    let mut g = c.benchmark_group("model3_grid_96_cells");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                calibrate_model3(&targets, &retentions, &multiples, REPORTED_SHARE, exec).unwrap()
            })
        });
    }
    g.finish();
}

/// Every upper-triangular DAG on `n` nodes, alternating borrower tags.
fn dags(n: usize) -> Vec<LoanGraph> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    (0u32..1 << pairs.len())
        .map(|mask| LoanGraph {
            nodes: (0..n)
                .map(|i| LoanNode {
                    id: format!("n{i}"),
                    kind: LoanKind::Commercial,
                    borrower: if i % 2 == 0 {
                        BorrowerType::EndBusinessBorrower
                    } else {
                        BorrowerType::Intermediary
                    },
                })
                .collect(),
            edges: pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &(i, j))| (format!("n{i}"), format!("n{j}")))
                .collect(),
        })
        .collect()
}

fn chains(c: &mut Criterion) {
    let graphs = dags(6);
    let mut g = c.benchmark_group("classify_all_6_node_dags");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| par::map(exec, &graphs, |gr| classify_chain(gr).unwrap().len()))
        });
    }
    g.finish();
}

criterion_group!(benches, reconstruction, calibration, chains);
criterion_main!(benches);
