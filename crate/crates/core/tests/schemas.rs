use std::collections::BTreeSet;

use rqcm::ensemble::{sample_rqcm, GoeSpec, MatrixRecord, RngSeed};
use rqcm::extend::FeasibilityStatus;
use rqcm::spectra::{ppt_defect, spectrum, symplectic_spectrum, SpectralSample};
use rqcm::stats::{histogram, run_sweep_detailed, Histogram, Observable, SweepConfig, SweepSummary};

fn header_line(csv: &str) -> &str {
    csv.lines().find(|l| !l.starts_with('#')).unwrap()
}

#[test]
fn matrix_record_survives_csv_and_json() {
    let spec = GoeSpec::new(3, 0.7, true).unwrap();
    let seed = RngSeed::new(5, 2);
    let q = sample_rqcm(&spec, seed).unwrap();
    let rec = MatrixRecord::new(&spec, seed, q.matrix(), q.shift());
    let csv = rec.to_csv();
    assert!(csv.starts_with("# schema: rqcm.matrix/1\n"));
    assert_eq!(header_line(&csv), "c0,c1,c2,c3,c4,c5");
    let from_csv = MatrixRecord::from_csv(&csv).unwrap();
    let from_json = MatrixRecord::from_json(&rec.to_json().unwrap()).unwrap();
    assert_eq!(from_csv.data, rec.data);
    assert_eq!(from_json.data, rec.data);
    assert_eq!((from_csv.seed, from_csv.stream), (5, 2));
    let part = rqcm::ensemble::ModeBipartition::new(1, 2).unwrap();
    assert_eq!(
        ppt_defect(&from_csv.matrix().unwrap(), part).unwrap(),
        ppt_defect(q.matrix(), part).unwrap()
    );
}

#[test]
fn spectral_samples_roundtrip() {
    let q = sample_rqcm(&GoeSpec::new(2, 1.0, false).unwrap(), RngSeed::new(9, 0)).unwrap();
    for s in [spectrum(&q).unwrap(), symplectic_spectrum(&q).unwrap()] {
        assert_eq!(header_line(&s.to_csv()), "value");
        assert_eq!(SpectralSample::from_csv(&s.to_csv()).unwrap().values, s.values);
        assert_eq!(SpectralSample::from_json(&s.to_json().unwrap()).unwrap().values, s.values);
    }
}

#[test]
fn histogram_columns() {
    let h = histogram(&[0.1, 0.2, 0.9, 1.0, 7.0], 4, Some((0.0, 1.0))).unwrap();
    let csv = h.to_csv();
    assert_eq!(header_line(&csv), "bin_left,bin_right,count,density");
    let back = Histogram::from_csv(&csv).unwrap();
    assert_eq!(back.counts, vec![2, 0, 0, 2]);
    assert_eq!(back.outside, 1);
    assert_eq!(back.bin_edges, h.bin_edges);
    assert_eq!(Histogram::from_json(&h.to_json().unwrap()).unwrap().counts, h.counts);
}

#[test]
fn sweep_summary_matches_outcomes() {
    let mut cfg = SweepConfig::new(2, 1.0, 30, 4).unwrap();
    cfg.what = BTreeSet::from([Observable::Ppt, Observable::Separability, Observable::MaxK, Observable::Purity]);
    cfg.k_cap = 8;
    let (summary, outcomes) = run_sweep_detailed(&cfg).unwrap();
    assert_eq!(outcomes.len(), 30);
    let ppt = outcomes.iter().filter(|o| o.ppt_defect.unwrap() >= -cfg.tol).count();
    assert_eq!(summary.counts.ppt, ppt);
    for o in &outcomes {
        if o.separable == Some(FeasibilityStatus::Feasible) {
            assert!(o.ppt_defect.unwrap() >= -10.0 * cfg.tol);
        }
    }
    let back = SweepSummary::from_json(&summary.to_json().unwrap()).unwrap();
    assert_eq!(back.to_json().unwrap(), summary.to_json().unwrap());
    assert!(SweepSummary::from_json(&summary.to_json().unwrap().replace("rqcm.sweep/1", "rqcm.sweep/0")).is_err());
}
