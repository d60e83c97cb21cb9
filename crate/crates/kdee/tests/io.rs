use std::fs;
use std::path::Path;

use kdee::io::{read_record, sidecar_path, write_record, Format, Meta};
use kdee::Error;
use kdee_core::simulators::{random_abs_sine_insert, SineConfig};
use kdee_core::{LabeledInterval, LabeledRecord, TimeSeries};
use serde_json::json;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn three_row_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "a.csv", "index,value\n0,1.5\n1,-2\n2,0.25\n");
    let doc = read_record(&p, Format::Csv, Some(10.0)).unwrap();
    assert_eq!(doc.record.series().samples(), [1.5, -2.0, 0.25]);
    assert_eq!(doc.record.series().sample_rate_hz(), 10.0);
    assert!(doc.record.truth().is_empty());
    // no rate on the command line and no sidecar
    assert!(matches!(read_record(&p, Format::Csv, None), Err(Error::Core(_))));
}

#[test]
fn labels_become_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "l.csv",
        "index,value,label\n0,0,n\n1,0,n\n2,1,a\n3,1,a\n4,0,n\n",
    );
    let doc = read_record(&p, Format::Csv, Some(1.0)).unwrap();
    assert_eq!(doc.record.truth(), [LabeledInterval::new(2, 4, "a")]);
}

#[test]
fn non_finite_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for (i, bad) in ["NaN", "inf", "-inf"].iter().enumerate() {
        let p = write(
            dir.path(),
            &format!("nan{i}.csv"),
            &format!("index,value\n0,1\n1,{bad}\n"),
        );
        let e = read_record(&p, Format::Csv, Some(1.0)).unwrap_err();
        assert!(matches!(e, Error::Core(kdee_core::Error::Validation(_))), "{e}");
        assert!(e.to_string().contains("line 3"), "{e}");
    }
}

#[test]
fn malformed_rows_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("index,value\n0,1\n1,x\n", 3),
        ("index,value\n0,1\n1,2\n2,3,4\n", 4),
        ("index,value\n0,1\n2,2\n", 3),
        ("idx,value\n0,1\n", 1),
    ];
    for (i, (text, line)) in cases.into_iter().enumerate() {
        let p = write(dir.path(), &format!("bad{i}.csv"), text);
        match read_record(&p, Format::Csv, Some(1.0)) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
}

#[test]
fn empty_inputs() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [("e.csv", ""), ("h.csv", "index,value\n")] {
        let p = write(dir.path(), name, text);
        assert!(matches!(
            read_record(&p, Format::Csv, Some(1.0)),
            Err(Error::Core(kdee_core::Error::Validation(_)))
        ));
    }
    let missing = dir.path().join("missing.csv");
    assert!(matches!(
        read_record(&missing, Format::Csv, Some(1.0)),
        Err(Error::Read { .. })
    ));
}

fn meta() -> Meta {
    match json!({ "seed": 7, "command": "test" }) {
        serde_json::Value::Object(m) => m,
        _ => unreachable!(),
    }
}

#[test]
fn json_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SineConfig {
        len: 5000,
        ..SineConfig::default()
    };
    let rec = random_abs_sine_insert(&cfg, 3, 128).unwrap();
    let p = dir.path().join("r.json");
    write_record(&rec, &meta(), &p, Format::Json).unwrap();
    let back = read_record(&p, Format::Json, None).unwrap();
    assert_eq!(back.record, rec);
    assert!(back
        .record
        .series()
        .samples()
        .iter()
        .zip(rec.series().samples())
        .all(|(a, b)| a.to_bits() == b.to_bits()));
    assert_eq!(back.meta, meta());
}

#[test]
fn csv_round_trip_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let x: Vec<f64> = (0..300).map(|i| (i as f64 * 0.37).sin() * 1e-3 + 1.0 / 3.0).collect();
    let rec = LabeledRecord::new(
        TimeSeries::new(x, 5000.0).unwrap(),
        vec![
            LabeledInterval::new(10, 20, "injection"),
            LabeledInterval::new(100, 250, "b"),
        ],
    )
    .unwrap();
    let p = dir.path().join("r.csv");
    write_record(&rec, &meta(), &p, Format::Csv).unwrap();
    assert!(sidecar_path(&p).exists());
    let back = read_record(&p, Format::Csv, None).unwrap();
    assert_eq!(back.record, rec);
    assert_eq!(back.meta, meta());
    // an explicit rate wins over the sidecar
    let over = read_record(&p, Format::Csv, Some(100.0)).unwrap();
    assert_eq!(over.record.series().sample_rate_hz(), 100.0);

    let plain = LabeledRecord::unlabeled(rec.series().clone());
    let q = dir.path().join("plain.csv");
    write_record(&plain, &Meta::new(), &q, Format::Csv).unwrap();
    assert!(fs::read_to_string(&q).unwrap().starts_with("index,value\n"));
    assert_eq!(read_record(&q, Format::Csv, None).unwrap().record, plain);
}

#[test]
fn formats_from_names_and_paths() {
    assert_eq!(Format::from_path(Path::new("a/b.JSON")), Format::Json);
    assert_eq!(Format::from_path(Path::new("a/b.txt")), Format::Csv);
    assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
    assert!("xml".parse::<Format>().is_err());
}

#[test]
fn failed_writes_leave_no_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("out.txt");
    fs::write(&p, "old").unwrap();
    let r = kdee::io::write_atomic(&p, |w| {
        w.write_all(b"partial")?;
        Err(std::io::Error::other("boom"))
    });
    assert!(matches!(r, Err(Error::Write { .. })));
    assert_eq!(fs::read_to_string(&p).unwrap(), "old");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}
