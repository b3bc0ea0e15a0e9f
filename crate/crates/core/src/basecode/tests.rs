use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::par::subsets;

fn random_data(code: &BaseCode, rng: &mut impl Rng) -> Vec<Vec<Elem>> {
    let q = code.field().order();
    (0..code.k())
        .map(|_| (0..code.n()).map(|_| rng.gen_range(0..q)).collect())
        .collect()
}

/// All `k + r` node contents of one base codeword.
fn nodes_of(code: &BaseCode, data: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
    let mut nodes = data.to_vec();
    nodes.extend(code.encode(data).unwrap());
    nodes
}

/// Direct matrix-product oracle for one parity.
fn parity_oracle(code: &BaseCode, j: usize, data: &[Vec<Elem>]) -> Vec<Elem> {
    let f = code.field();
    let mut acc = MatrixGF::zeros(f, code.n(), 1);
    for (i, v) in data.iter().enumerate() {
        let col = MatrixGF::column(f, v).unwrap();
        acc = acc.add(&code.coding(j, i).mul(&col).unwrap()).unwrap();
    }
    acc.data().to_vec()
}

fn repair_downloads(code: &BaseCode, i: usize, nodes: &[Vec<Elem>]) -> Vec<Option<Vec<Elem>>> {
    (0..nodes.len())
        .map(|j| (j != i).then(|| code.helper_download(i, j, &nodes[j]).unwrap()))
        .collect()
}

fn as_refs(d: &[Option<Vec<Elem>>]) -> Vec<Option<&[Elem]>> {
    d.iter().map(|x| x.as_deref()).collect()
}

fn eigen_5_3() -> BaseCode {
    make_eigen_base(2, 5, 11).unwrap()
}

fn eigen_7_4() -> BaseCode {
    make_eigen_base(3, 7, 11).unwrap()
}

#[test]
fn eigen_bases_pass_verifiers() {
    for code in [eigen_5_3(), eigen_7_4()] {
        assert_eq!(code.k(), code.r() + 1);
        assert_eq!(code.n(), code.r());
        let report = verify_all(&code);
        assert_eq!(report.mds_ok, Some(true), "{:?}", report.failures);
        assert_eq!(report.repair_ok, Some(true), "{:?}", report.failures);
        assert!(report.failures.is_empty());
        assert!(code.has_uniform_repair());
    }
    let code = eigen_5_3();
    let s = |i| code.repair().unwrap().shared(i).unwrap().row(0).to_vec();
    assert_eq!(s(0), vec![1, 0]);
    assert_eq!(s(1), vec![0, 1]);
    assert_eq!(s(2), vec![1, 1]);
}

#[test]
fn eigen_base_over_gf3_either_outcome_is_valid() {
    match make_eigen_base(2, 3, 0) {
        Ok(code) => assert!(verify_all(&code).passed()),
        Err(e) => assert_eq!(e, Error::SearchExhausted(EIGEN_SEARCH_BUDGET)),
    }
}

#[test]
fn eigen_base_over_binary_extensions() {
    for q in [16, 256] {
        let code = make_eigen_base(2, q, 3).unwrap();
        assert!(verify_all(&code).passed());
    }
}

#[test]
fn encode_examples() {
    let code = eigen_5_3();
    let zero = vec![vec![0; 2]; 3];
    assert!(code.encode(&zero).unwrap().iter().flatten().all(|&v| v == 0));

    let f = Field::with_order(5).unwrap();
    let params = BaseCodeParams::new(3, 2, 2, f.clone()).unwrap();
    let ident = vec![vec![MatrixGF::identity(&f, 2); 3]; 2];
    let identity_code = BaseCode::new(params, ident, None).unwrap();
    let data = vec![vec![1, 0], vec![2, 0], vec![4, 0]];
    for g in identity_code.encode(&data).unwrap() {
        assert_eq!(g, vec![2, 0]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let data = random_data(&code, &mut rng);
        let parities = code.encode(&data).unwrap();
        for (j, g) in parities.iter().enumerate() {
            assert_eq!(g, &parity_oracle(&code, j, &data));
        }
    }
    assert!(matches!(
        code.encode(&vec![vec![0; 2]; 2]),
        Err(Error::DimensionMismatch(_))
    ));
    assert!(matches!(
        code.encode(&vec![vec![0; 3]; 3]),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn verify_mds_negative_cases() {
    let f = Field::with_order(5).unwrap();
    let params = BaseCodeParams::new(1, 2, 1, f.clone()).unwrap();
    let zero = MatrixGF::zeros(&f, 1, 1);
    let one = MatrixGF::identity(&f, 1);
    let code = BaseCode::new(params, vec![vec![zero], vec![one]], None).unwrap();
    let report = verify_mds(&code);
    assert_eq!(report.mds_ok, Some(false));
    assert_eq!(
        report.failures[0].witness,
        Witness::SubBlock {
            rows: vec![0],
            cols: vec![0]
        }
    );

    let params = BaseCodeParams::new(2, 2, 2, f.clone()).unwrap();
    let ident = vec![vec![MatrixGF::identity(&f, 2); 2]; 2];
    let code = BaseCode::new(params, ident, None).unwrap();
    let report = verify_mds(&code);
    assert_eq!(report.mds_ok, Some(false));
    assert!(report.failures.iter().any(|fl| fl.witness
        == Witness::SubBlock {
            rows: vec![0, 1],
            cols: vec![0, 1]
        }));
}

#[test]
fn verify_repair_detects_zeroed_repair_vector() {
    let code = eigen_5_3();
    let rep = code.repair().unwrap();
    let mut per_node: Vec<MatrixGF> = (0..3).map(|i| rep.shared(i).unwrap().clone()).collect();
    per_node[1] = MatrixGF::zeros(code.field(), 1, 2);
    let broken = code
        .with_repair(Some(RepairMatrices::uniform(per_node, 5)))
        .unwrap();
    let report = verify_repair(&broken).unwrap();
    assert_eq!(report.repair_ok, Some(false));
    assert!(report
        .failures_of(Condition::UsefulDataRank)
        .any(|f| matches!(f.witness, Witness::Node { node: 1, rank: 0 })));
    assert_eq!(
        verify_repair(&code.with_repair(None).unwrap()),
        Err(Error::MissingRepairMatrices)
    );
}

/// Bumps one entry of `A_{1,0}` so that `S_2` stops being a left eigenvector.
fn break_interference(code: &BaseCode) -> BaseCode {
    let f = code.field();
    let mut a = code.coding(1, 0).clone();
    a.set(0, 0, f.add(a.get(0, 0), 1));
    code.with_coding(1, 0, a).unwrap()
}

#[test]
fn verify_repair_detects_broken_eigenvector() {
    let broken = break_interference(&eigen_5_3());
    let report = verify_repair(&broken).unwrap();
    assert_eq!(report.repair_ok, Some(false));
    let pairs: Vec<_> = report
        .failures_of(Condition::InterferenceRank)
        .map(|f| f.witness.clone())
        .collect();
    assert!(pairs.contains(&Witness::Pair {
        node: 2,
        helper: 0,
        rank: 2
    }));
}

#[test]
fn broken_interference_yields_wrong_repair() {
    let broken = break_interference(&eigen_5_3());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut wrong = 0;
    for _ in 0..50 {
        let data = random_data(&broken, &mut rng);
        let nodes = nodes_of(&broken, &data);
        let d = repair_downloads(&broken, 2, &nodes);
        let out = base_repair_systematic(&broken, 2, &as_refs(&d)).unwrap();
        if out != data[2] {
            wrong += 1;
        }
    }
    assert!(wrong > 0);
}

#[test]
fn access_counts() {
    let code = eigen_5_3();
    let report = verify_access(&code).unwrap();
    let access = report.access.unwrap();
    // S_0 = (1,0) and S_1 = (0,1) touch one column, S_2 = (1,1) touches both.
    assert_eq!(access.counts[0][1], Some(1));
    assert_eq!(access.counts[0][0], None);
    assert_eq!(access.counts[2][0], Some(2));
    assert_eq!(access.optimal, vec![true, true, false]);

    let f = code.field();
    let ones = MatrixGF::from_rows(f, &[vec![1, 1]]).unwrap();
    let all_ones = code
        .with_repair(Some(RepairMatrices::uniform(vec![ones; 3], 5)))
        .unwrap();
    let access = verify_access(&all_ones).unwrap().access.unwrap();
    assert!(access.optimal.iter().all(|&o| !o));
}

#[test]
fn perturbed_scalars() {
    let code = eigen_5_3();
    let ones = vec![vec![1; 5]; 3];
    let same = scale_repair_matrices(&code, &ones).unwrap();
    assert_eq!(same, code);

    let perturbed = perturb_repair_scalars(&code, 4).unwrap();
    assert!(!perturbed.has_uniform_repair());
    assert_eq!(verify_repair(&perturbed).unwrap().repair_ok, Some(true));
    let rep = perturbed.repair().unwrap();
    assert_ne!(rep.get(0, 1), rep.get(0, 2));
}

#[test]
fn systematic_repair_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for code in [eigen_5_3(), eigen_7_4()] {
        let perturbed = perturb_repair_scalars(&code, 8).unwrap();
        for c in [&code, &perturbed] {
            let zero = vec![vec![0; c.n()]; c.k()];
            let nodes = nodes_of(c, &zero);
            let d = repair_downloads(c, 0, &nodes);
            assert_eq!(base_repair_systematic(c, 0, &as_refs(&d)).unwrap(), zero[0]);
            for _ in 0..20 {
                let data = random_data(c, &mut rng);
                let nodes = nodes_of(c, &data);
                for i in 0..c.k() {
                    let d = repair_downloads(c, i, &nodes);
                    // N/r symbols from each of the k+r-1 helpers
                    let total: usize = d.iter().flatten().map(Vec::len).sum();
                    assert_eq!(total, (c.k() + c.r() - 1) * c.n() / c.r());
                    let out = base_repair_systematic(c, i, &as_refs(&d)).unwrap();
                    assert_eq!(out, data[i]);
                }
            }
        }
    }
}

#[test]
fn systematic_repair_errors() {
    let code = eigen_5_3();
    let bare = code.with_repair(None).unwrap();
    assert!(matches!(
        SystematicRepair::new(&bare, 0),
        Err(Error::MissingRepairMatrices)
    ));
    let f = code.field();
    let zero = MatrixGF::zeros(f, 1, 2);
    let s1 = code.repair().unwrap().shared(1).unwrap().clone();
    let s2 = code.repair().unwrap().shared(2).unwrap().clone();
    let broken = code
        .with_repair(Some(RepairMatrices::uniform(vec![zero, s1, s2], 5)))
        .unwrap();
    assert_eq!(
        SystematicRepair::new(&broken, 0).unwrap_err(),
        Error::RankDeficient(0)
    );
}

#[test]
fn decode_every_subset() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for code in [eigen_5_3(), eigen_7_4()] {
        let (k, r) = (code.k(), code.r());
        let data = random_data(&code, &mut rng);
        let nodes = nodes_of(&code, &data);
        let all = subsets(k + r, k);
        assert_eq!(all.len(), if k == 3 { 10 } else { 35 });
        for ids in all {
            let avail: Vec<(usize, Vec<Elem>)> =
                ids.iter().map(|&id| (id, nodes[id].clone())).collect();
            assert_eq!(base_decode(&code, &avail).unwrap(), data, "{ids:?}");
        }
    }
}

#[test]
fn decode_errors_and_passthrough() {
    let code = eigen_5_3();
    let data = vec![vec![1, 2], vec![3, 4], vec![0, 1]];
    let nodes = nodes_of(&code, &data);
    let systematic: Vec<(usize, Vec<Elem>)> = (0..3).map(|i| (i, nodes[i].clone())).collect();
    assert_eq!(base_decode(&code, &systematic).unwrap(), data);
    assert!(matches!(
        base_decode(&code, &systematic[..2]),
        Err(Error::WrongCount { .. })
    ));
    let dup = vec![
        (0, nodes[0].clone()),
        (0, nodes[0].clone()),
        (1, nodes[1].clone()),
    ];
    assert!(matches!(base_decode(&code, &dup), Err(Error::WrongCount { .. })));

    let f = Field::with_order(5).unwrap();
    let params = BaseCodeParams::new(2, 2, 1, f.clone()).unwrap();
    let one = MatrixGF::identity(&f, 1);
    let degenerate = BaseCode::new(params, vec![vec![one.clone(); 2]; 2], None).unwrap();
    assert_eq!(
        BaseDecoder::new(&degenerate, &[2, 3]).unwrap_err(),
        Error::SingularSelection
    );
}

#[test]
fn params_validation() {
    let f = Field::with_order(5).unwrap();
    assert!(BaseCodeParams::new(0, 2, 1, f.clone()).is_err());
    assert!(BaseCodeParams::new(1, 1, 1, f.clone()).is_err());
    let params = BaseCodeParams::new(2, 2, 3, f.clone()).unwrap();
    let grid = vec![vec![MatrixGF::identity(&f, 3); 2]; 2];
    let s = MatrixGF::zeros(&f, 1, 3);
    // r does not divide N
    assert!(matches!(
        BaseCode::new(params, grid, Some(RepairMatrices::uniform(vec![s; 2], 4))),
        Err(Error::InvalidParams(_))
    ));
}

#[test]
fn descriptor_round_trip() {
    for code in [eigen_5_3(), eigen_7_4(), make_eigen_base(2, 256, 1).unwrap()] {
        let text = save_descriptor(&code);
        let loaded = load_descriptor(&text).unwrap();
        assert_eq!(loaded, code);
        assert_eq!(save_descriptor(&loaded), text);
        let perturbed = perturb_repair_scalars(&code, 2).unwrap();
        let text = save_descriptor(&perturbed);
        assert!(text.contains("\nS 0 1\n"));
        assert_eq!(load_descriptor(&text).unwrap(), perturbed);
        let bare = code.with_repair(None).unwrap();
        assert_eq!(load_descriptor(&save_descriptor(&bare)).unwrap(), bare);
    }
}

#[test]
fn descriptor_fixture_with_comments() {
    let text = "\
# a (3,1) toy code
msrforge-base 1
field 5
params 1 2 1   # k r N
A 0 0
1
A 1 0
2
";
    let code = load_descriptor(text).unwrap();
    assert!(code.repair().is_none());
    assert_eq!(code.coding(1, 0).get(0, 0), 2);
    assert!(verify_mds(&code).passed());
}

#[test]
fn descriptor_errors() {
    let good = save_descriptor(&eigen_5_3());
    let first_row = good.lines().nth(4).unwrap();
    let swap_first_row = |with: &str| good.replacen(&format!("A 0 0\n{first_row}"), &format!("A 0 0\n{with}"), 1);
    let out_of_field = swap_first_row("7 0");
    assert!(matches!(
        load_descriptor(&out_of_field),
        Err(Error::ValueOutOfField { value: 7, q: 5, .. })
    ));
    let bad_header = good.replacen("msrforge-base 1", "msrforge-base 2", 1);
    assert!(matches!(load_descriptor(&bad_header), Err(Error::Parse { line: 1, .. })));
    let bad_field = good.replacen("field 5", "field 6", 1);
    assert!(matches!(load_descriptor(&bad_field), Err(Error::Parse { line: 2, .. })));
    let short_row = swap_first_row("1");
    assert!(matches!(load_descriptor(&short_row), Err(Error::Parse { line: 5, .. })));
    let trailing = format!("{good}bogus 1\n");
    assert!(matches!(load_descriptor(&trailing), Err(Error::Parse { .. })));
    let missing: String = good.lines().take(5).map(|l| format!("{l}\n")).collect();
    assert!(matches!(load_descriptor(&missing), Err(Error::Parse { .. })));
}
