use proptest::prelude::*;

use torus4::circuit::{build_round, repeat_rounds, CircuitKind};
use torus4::complex::css_from_lattice;
use torus4::decoders::{build_joint_model, BpOsdConfig, ShotDecoder};
use torus4::homology::{logical_basis_linear, Sector};
use torus4::lattice::{hnf_reduce, named_lattice};
use torus4::sim::{enumerate_single_faults, read_records, write_records, NoiseModel, NoisyCircuit};

fn det3_noisy(p: f64, rounds: usize) -> (NoisyCircuit, torus4::homology::LogicalBasis) {
    let h = named_lattice("Det3").unwrap().hnf();
    let code = css_from_lattice(&h);
    let basis = logical_basis_linear(&code);
    let c = repeat_rounds(&build_round(CircuitKind::Compact, &h, &code), rounds, true);
    (NoisyCircuit::new(&c, NoiseModel::standard(p)), basis)
}

#[test]
fn shot_stream_replays_bit_identically() {
    let (nc, basis) = det3_noisy(5e-3, 3);
    let a = nc.sample_shots(500, 99, &basis);
    let b = nc.sample_shots(500, 99, &basis);
    assert_eq!(a, b);
    assert_ne!(a, nc.sample_shots(500, 100, &basis));

    let mut buf = Vec::new();
    write_records(&mut buf, &a, &serde_json::json!({"seed": 99})).unwrap();
    let (header, back) = read_records(std::io::Cursor::new(buf)).unwrap();
    assert_eq!(header["seed"], 99);
    assert_eq!(back, a);
}

#[test]
fn detector_error_model_export() {
    let (nc, basis) = det3_noisy(1e-3, 3);
    let fd = enumerate_single_faults(&nc, &basis);
    let model = build_joint_model(&fd, Sector::X);
    let text = model.to_dem_text();
    let errors: Vec<&str> = text.lines().filter(|l| l.starts_with("error(")).collect();
    assert_eq!(errors.len(), model.num_columns());
    assert!(errors.iter().all(|l| l.contains(" D")));
}

#[test]
fn sampled_shots_decode_mostly_correctly_at_low_noise() {
    let (nc, basis) = det3_noisy(5e-4, 3);
    let fd = enumerate_single_faults(&nc, &basis);
    let dec = ShotDecoder::joint(&fd, BpOsdConfig::default());
    let shots = nc.sample_shots(2000, 5, &basis);
    let failures = shots.iter().filter(|s| dec.decode_shot(s).unwrap().failed()).count();
    // Per-round block rate at this noise level is a few 1e-4.
    assert!(failures < 20, "{failures} failures");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    // Row operations on a basis leave its Hermite normal form unchanged.
    #[test]
    fn hnf_is_invariant_under_row_operations(i in 0usize..4, j in 0usize..4, c in -3i64..=3) {
        let h = named_lattice("Det45").unwrap().hnf();
        let mut b = *h.rows();
        if i != j {
            for k in 0..4 {
                b[i][k] += c * b[j][k];
            }
        }
        b.swap(0, 3);
        prop_assert_eq!(hnf_reduce(b).unwrap(), h);
    }
}
