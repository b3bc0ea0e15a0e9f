use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::basecode::{make_eigen_base, perturb_repair_scalars, BaseCode};
use crate::transform::{transform, Orientation, PermutationFamily, ThetaTable};

fn build(base: BaseCode, perms: PermutationFamily) -> MsrCode {
    let a = ThetaTable::default_a(base.field());
    let theta = ThetaTable::new(base.field(), base.r(), a).unwrap();
    transform(base, perms, theta).unwrap()
}

fn msr_5_3() -> MsrCode {
    build(make_eigen_base(2, 5, 11).unwrap(), PermutationFamily::cyclic(2))
}

fn msr_7_4() -> MsrCode {
    build(make_eigen_base(3, 7, 11).unwrap(), PermutationFamily::cyclic(3))
}

fn codeword(msr: &MsrCode, rng: &mut ChaCha8Rng) -> Vec<Vec<Elem>> {
    let q = msr.field().order();
    let data: Vec<Vec<Elem>> = (0..msr.k())
        .map(|_| (0..msr.capacity()).map(|_| rng.gen_range(0..q)).collect())
        .collect();
    msr.encode(&data).unwrap().into_nodes()
}

fn without(nodes: &[Vec<Elem>], failed: usize) -> Vec<Option<&[Elem]>> {
    nodes
        .iter()
        .enumerate()
        .map(|(id, c)| (id != failed).then_some(c.as_slice()))
        .collect()
}

fn round_trip_all(msr: &MsrCode, samples: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plans: Vec<RepairPlan> = (0..msr.node_count())
        .map(|id| RepairPlan::new(msr, id).unwrap())
        .collect();
    for _ in 0..samples {
        let nodes = codeword(msr, &mut rng);
        for plan in &plans {
            let id = plan.node();
            let (out, trace) = plan.repair(&without(&nodes, id)).unwrap();
            assert_eq!(out, nodes[id], "node {id}");
            assert_eq!(trace.helpers.len(), msr.node_count() - 1);
            assert!(trace.downloaded.iter().all(|&d| d == msr.n()));
            assert_eq!(trace.total(), (msr.node_count() - 1) * msr.n());
            assert!(trace.is_optimal());
            if id >= msr.k() {
                assert!(trace.is_access_optimal());
            }
        }
    }
}

#[test]
fn zero_codeword_repairs_to_zero() {
    let msr = msr_5_3();
    let zero = vec![vec![0; 4]; 5];
    for id in 0..5 {
        let (out, trace) = repair_node(&msr, id, &without(&zero, id)).unwrap();
        assert_eq!(out, vec![0; 4]);
        assert!(trace.is_optimal());
    }
}

#[test]
fn every_node_round_trips() {
    round_trip_all(&msr_5_3(), 20, 1);
    round_trip_all(&msr_7_4(), 10, 2);
}

#[test]
fn per_helper_case_round_trips() {
    let base = perturb_repair_scalars(&make_eigen_base(3, 7, 11).unwrap(), 5).unwrap();
    assert!(!base.has_uniform_repair());
    round_trip_all(&build(base, PermutationFamily::cyclic(3)), 10, 3);
}

#[test]
fn uniform_case_accepts_any_permutations() {
    let perms = PermutationFamily::explicit(vec![vec![0, 1, 2], vec![0, 1, 2], vec![2, 1, 0]]).unwrap();
    assert!(!perms.is_symmetric());
    round_trip_all(&build(make_eigen_base(3, 7, 11).unwrap(), perms), 10, 4);
}

#[test]
fn binary_extension_round_trips() {
    round_trip_all(
        &build(make_eigen_base(2, 16, 1).unwrap(), PermutationFamily::cyclic(2)),
        10,
        5,
    );
    round_trip_all(
        &build(make_eigen_base(3, 256, 1).unwrap(), PermutationFamily::cyclic(3)),
        5,
        6,
    );
}

#[test]
fn systematic_access_is_r_times_support() {
    let msr = msr_5_3();
    let rep = msr.base().repair().unwrap();
    for i in 0..msr.k() {
        let trace = RepairPlan::new(&msr, i).unwrap().trace();
        for (slot, &h) in trace.helpers.iter().enumerate() {
            let support = rep.get(i, h).unwrap().nonzero_columns();
            assert_eq!(trace.accessed[slot], msr.r() * support);
        }
    }
    // S_0 and S_1 are unit vectors, S_2 is all-ones.
    assert!(RepairPlan::new(&msr, 0).unwrap().trace().is_access_optimal());
    assert!(!RepairPlan::new(&msr, 2).unwrap().trace().is_access_optimal());
}

#[test]
fn payloads_match_repair_matrices() {
    let msr = msr_7_4();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let nodes = codeword(&msr, &mut rng);
    let set = msr.repair_matrices().unwrap();
    for i in 0..msr.k() {
        let plan = RepairPlan::new(&msr, i).unwrap();
        for &h in plan.helpers() {
            let payload = plan.helper_payload(h, &nodes[h]).unwrap();
            assert_eq!(payload, set.get(i, h).unwrap().mul_vec(&nodes[h]).unwrap());
        }
    }
    for j in 0..msr.r() {
        let plan = RepairPlan::new(&msr, msr.k() + j).unwrap();
        let sel = msr.parity_repair_matrix(j);
        for &h in plan.helpers() {
            assert_eq!(
                plan.helper_payload(h, &nodes[h]).unwrap(),
                sel.mul_vec(&nodes[h]).unwrap()
            );
        }
    }
}

#[test]
fn parity_zero_reads_instance_zero_column() {
    let msr = msr_7_4();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let nodes = codeword(&msr, &mut rng);
    let plan = RepairPlan::new(&msr, msr.k()).unwrap();
    for &h in plan.helpers() {
        assert_eq!(plan.helper_payload(h, &nodes[h]).unwrap(), &nodes[h][0..3]);
    }
}

#[test]
fn corrupted_download_changes_result() {
    let msr = msr_5_3();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let nodes = codeword(&msr, &mut rng);
    for id in 0..msr.node_count() {
        let plan = RepairPlan::new(&msr, id).unwrap();
        let mut payloads: Vec<Option<Vec<Elem>>> = (0..msr.node_count())
            .map(|h| (h != id).then(|| plan.helper_payload(h, &nodes[h]).unwrap()))
            .collect();
        assert_eq!(plan.regenerate(&payloads).unwrap(), nodes[id]);
        let h = plan.helpers()[0];
        let p = payloads[h].as_mut().unwrap();
        p[0] = msr.field().add(p[0], 1);
        assert_ne!(plan.regenerate(&payloads).unwrap(), nodes[id], "node {id}");
    }
}

#[test]
fn repair_without_base_repair_matrices() {
    let base = make_eigen_base(2, 5, 11).unwrap().with_repair(None).unwrap();
    let msr = build(base, PermutationFamily::cyclic(2));
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let nodes = codeword(&msr, &mut rng);
    for j in 0..2 {
        let (out, trace) = repair_parity(&msr, j, &without(&nodes, 3 + j)).unwrap();
        assert_eq!(out, nodes[3 + j]);
        assert!(trace.is_optimal() && trace.is_access_optimal());
    }
    assert_eq!(
        repair_systematic(&msr, 0, &without(&nodes, 0)).unwrap_err(),
        Error::MissingRepairMatrices
    );
}

#[test]
fn broken_base_gives_wrong_repair() {
    let good = make_eigen_base(2, 5, 11).unwrap();
    let f = good.field();
    let mut a = good.coding(1, 0).clone();
    a.set(0, 0, f.add(a.get(0, 0), 1));
    let broken = good.with_coding(1, 0, a).unwrap();
    let theta = ThetaTable::new(f, 2, 4).unwrap();
    let msr = MsrCode::new_unverified(broken, PermutationFamily::cyclic(2), theta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let wrong = (0..20)
        .filter(|_| {
            let nodes = codeword(&msr, &mut rng);
            repair_systematic(&msr, 2, &without(&nodes, 2)).unwrap().0 != nodes[2]
        })
        .count();
    assert!(wrong > 0);
}

#[test]
fn singular_theta_is_a_contract_breach() {
    let base = make_eigen_base(2, 5, 11).unwrap();
    let theta = ThetaTable::new_unchecked(base.field(), 1, Orientation::default_for(2));
    let msr = MsrCode::new_unverified(base, PermutationFamily::cyclic(2), theta).unwrap();
    assert_eq!(RepairPlan::new(&msr, 0).unwrap_err(), Error::ThetaSingular);
}

#[test]
fn errors() {
    let msr = msr_5_3();
    let zero = vec![vec![0; 4]; 5];
    assert!(matches!(RepairPlan::new(&msr, 5), Err(Error::IndexOutOfRange(_))));
    assert!(matches!(repair_systematic(&msr, 3, &without(&zero, 3)), Err(Error::IndexOutOfRange(_))));
    assert!(matches!(repair_parity(&msr, 2, &without(&zero, 0)), Err(Error::IndexOutOfRange(_))));
    let mut two_down = without(&zero, 0);
    two_down[1] = None;
    assert_eq!(repair_node(&msr, 0, &two_down).unwrap_err(), Error::TooManyFailures(2));
    let short = vec![vec![0; 3]; 5];
    assert!(matches!(repair_node(&msr, 0, &without(&short, 0)), Err(Error::DimensionMismatch(_))));
}

#[test]
fn trace_line_and_aggregation() {
    let msr = msr_5_3();
    let plan = RepairPlan::new(&msr, 3).unwrap();
    let one = plan.trace();
    assert_eq!(
        one.to_string(),
        "repair node=3 helpers=4 per_helper=2 total=8 optimal=true access_optimal=true"
    );
    let mut sum = one.clone();
    for _ in 0..9 {
        sum.absorb(&one);
    }
    assert_eq!(sum, plan.trace_for(10));
    assert_eq!(sum.total(), 80);
    assert_eq!(sum.ratio(), 1.0);
    assert!(sum.is_optimal());
}
