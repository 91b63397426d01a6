//! Decode then re-encode every document kind; the bytes must not change.

use nalgebra::DVector;
use serde::{de::DeserializeOwned, Serialize};

use gptforge::embed::{dual_cone, embed_test, ConeDescription, EmbedOptions};
use gptforge::quantum::stabilizer_fragment;
use gptforge::report::{InputHash, RunReport};
use gptforge::schema::{
    parse, schema_of, to_canonical, CertificateDoc, ConeDoc, FragmentDoc, FrameDoc, StatsTableDoc, TomlocDoc,
    CERTIFICATE_V1, CONE_V1, FRAGMENT_V1, FRAME_V1, REPORT_V1, STATSTABLE_V1, TOMLOC_V1,
};
use gptforge::zoo::{self, MODELS};

fn round_trip<T: Serialize + DeserializeOwned>(text: &str, schema: &str) {
    assert_eq!(schema_of(text).unwrap(), schema);
    let doc: T = parse(text, schema).unwrap();
    let again = to_canonical(&doc).unwrap();
    assert_eq!(again, text, "{schema} changed on re-encoding");
}

#[test]
fn every_zoo_model() {
    for m in MODELS {
        let text = zoo::emit(m.name, None, false).unwrap().to_json().unwrap();
        match schema_of(&text).unwrap().as_str() {
            FRAGMENT_V1 => round_trip::<FragmentDoc>(&text, FRAGMENT_V1),
            FRAME_V1 => round_trip::<FrameDoc>(&text, FRAME_V1),
            TOMLOC_V1 => round_trip::<TomlocDoc>(&text, TOMLOC_V1),
            other => panic!("unexpected schema {other}"),
        }
    }
    let stats = zoo::emit("qubit-stabilizer", None, true).unwrap().to_json().unwrap();
    round_trip::<StatsTableDoc>(&stats, STATSTABLE_V1);
}

#[test]
fn decoded_documents_rebuild_the_same_objects() {
    let f = stabilizer_fragment(3).unwrap();
    let text = to_canonical(&FragmentDoc::from_fragment(&f)).unwrap();
    let back = parse::<FragmentDoc>(&text, FRAGMENT_V1).unwrap().to_fragment().unwrap();
    assert_eq!(to_canonical(&FragmentDoc::from_fragment(&back)).unwrap(), text);
    assert_eq!(back.states.len(), 12);

    let table = zoo::qubit_stabilizer_stats().unwrap();
    let text = to_canonical(&StatsTableDoc::from_table(&table)).unwrap();
    let back = parse::<StatsTableDoc>(&text, STATSTABLE_V1).unwrap().to_table().unwrap();
    assert_eq!(back, table);
}

#[test]
fn certificates_of_both_kinds() {
    let feasible = stabilizer_fragment(2).unwrap();
    let out = embed_test(&feasible, "qubit", EmbedOptions::default()).unwrap();
    assert!(out.is_feasible());
    let text = to_canonical(&CertificateDoc::from_certificate(&out.certificate())).unwrap();
    round_trip::<CertificateDoc>(&text, CERTIFICATE_V1);
    let back = parse::<CertificateDoc>(&text, CERTIFICATE_V1).unwrap().to_certificate().unwrap();
    assert_eq!(back, out.certificate());

    let gpt = zoo::emit("qubit-gpt", None, false).unwrap();
    let zoo::ZooItem::Fragment(f) = gpt else { panic!() };
    let out = embed_test(&f, "qubit", EmbedOptions::default()).unwrap();
    let text = to_canonical(&CertificateDoc::from_certificate(&out.certificate())).unwrap();
    round_trip::<CertificateDoc>(&text, CERTIFICATE_V1);
}

#[test]
fn cones_and_reports() {
    let rays = vec![
        DVector::from_vec(vec![1.0, 0.5, 0.0]),
        DVector::from_vec(vec![1.0, -0.5, 0.25]),
        DVector::from_vec(vec![1.0, 0.0, -1.0 / 3.0]),
    ];
    let cone = dual_cone(&ConeDescription::new(3, rays).unwrap(), 1e-10).unwrap();
    let text = to_canonical(&ConeDoc::from_cone(&cone)).unwrap();
    round_trip::<ConeDoc>(&text, CONE_V1);

    let mut r = RunReport::new("embed", 1e-9);
    r.seed = Some(3);
    r.inputs.push(InputHash::of_bytes("a.json", b"{}"));
    r.verdict("embed_test", true, "feasible").residual("certificate", 0.1 + 0.2);
    r.wall_time_s = 0.125;
    let text = to_canonical(&r).unwrap();
    round_trip::<RunReport>(&text, REPORT_V1);
}

#[test]
fn unknown_fields_and_wrong_schemas_are_rejected() {
    let text = zoo::emit("toy-bit-frame", None, false).unwrap().to_json().unwrap();
    assert!(parse::<FrameDoc>(&text, FRAGMENT_V1).is_err());
    let extra = text.replacen('{', "{\"extra\":1,", 1);
    assert!(parse::<FrameDoc>(&extra, FRAME_V1).is_err());
}
