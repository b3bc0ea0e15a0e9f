use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use msrforge::basecode::{make_eigen_base, verify_mds_with};
use msrforge::cluster::{encode_stripes, read_stripes, repair_stripes};
use msrforge::reconstruct::ReconstructionPlan;
use msrforge::repair::RepairPlan;
use msrforge::transform::{check_full_with_grid, transform, MsrCode, PermutationFamily, ThetaTable};
use msrforge::{Elem, Exec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STRIPES: usize = 4096;

fn modes() -> Vec<(&'static str, Exec)> {
    #[allow(unused_mut)]
    let mut modes = vec![("sequential", Exec::Sequential)];
    #[cfg(feature = "parallel")]
    modes.push(("parallel", Exec::Parallel));
    modes
}

fn code_7_4() -> MsrCode {
    let base = make_eigen_base(3, 256, 1).unwrap();
    let theta = ThetaTable::new(base.field(), 3, 2).unwrap();
    transform(base, PermutationFamily::cyclic(3), theta).unwrap()
}

fn stored(msr: &MsrCode) -> (Vec<Elem>, Vec<Vec<Elem>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let source: Vec<Elem> = (0..STRIPES * msr.k() * msr.capacity())
        .map(|_| rng.gen_range(0..256))
        .collect();
    let nodes = encode_stripes(msr, &source, Exec::Sequential).unwrap();
    (source, nodes)
}

fn verification(c: &mut Criterion) {
    let msr = code_7_4();
    let mut group = c.benchmark_group("verify");
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::new("mds", name), |b| {
            b.iter(|| verify_mds_with(black_box(msr.base()), exec))
        });
        group.bench_function(BenchmarkId::new("check_full", name), |b| {
            b.iter(|| check_full_with_grid(black_box(&msr), msr.b_grid(), exec))
        });
    }
    group.finish();
}

fn stripes(c: &mut Criterion) {
    let msr = code_7_4();
    let (source, nodes) = stored(&msr);
    let cap = msr.capacity();
    let repair = RepairPlan::new(&msr, 1).unwrap();
    let helpers: Vec<Option<&[Elem]>> = nodes
        .iter()
        .enumerate()
        .map(|(id, n)| (id != 1).then_some(n.as_slice()))
        .collect();
    let read = ReconstructionPlan::new(&msr, &[3, 4, 5, 6]).unwrap();
    let parities: Vec<&[Elem]> = nodes[3..].iter().map(Vec::as_slice).collect();

    let mut group = c.benchmark_group("stripes");
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::new("encode", name), |b| {
            b.iter(|| encode_stripes(&msr, black_box(&source), exec).unwrap())
        });
        group.bench_function(BenchmarkId::new("repair", name), |b| {
            b.iter(|| repair_stripes(&repair, cap, black_box(&helpers), exec).unwrap())
        });
        group.bench_function(BenchmarkId::new("reconstruct", name), |b| {
            b.iter(|| read_stripes(&read, cap, black_box(&parities), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, verification, stripes);
criterion_main!(benches);
