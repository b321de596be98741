use proptest::prelude::*;
use rwtc::expr::parse_expr;
use rwtc::model::RTipe;
use rwtc::schema::{load_schema, parse_manifest, ConfigSchema, CrossConstraint, FieldSpec};

/// (tipe, property, candidate defaults) combinations that are valid together.
const SHAPES: &[(RTipe, &str, &[&str])] = &[
    (RTipe::Int, "value == -1 or value >= 1", &["-1", "1", "7"]),
    (RTipe::Pos, "value mod env.hw_page_size == 0", &["4096", "8192"]),
    (RTipe::Pos, "true", &["1", "99"]),
    (RTipe::NonNeg, "value <= 1000", &["0", "1000"]),
    (RTipe::Str, "value in env.comp_codecs", &["org.apache.hadoop.io.compress.GzipCodec"]),
    (RTipe::Str, r#"value != "a|b,c\\d""#, &["x|y", "p,q", r"back\slash"]),
    (RTipe::Bool, "true", &["true", "false"]),
    (RTipe::Float, "value > 0.0 and value <= 1.0", &["0.5", ".25", "1.0"]),
    (RTipe::JavaOpts, "max_heap(value) <= env.phys_mem_mb", &["-Xms256m -Xmx768m", "-Xms1g -Xmx2g -XX:+UseG1GC"]),
    (RTipe::OptionPos, "is_none(value) or unwrap(value) <= 10", &["-1", "3"]),
];

fn text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 |,\\\\.;:()%-]{0,24}".prop_map(|s| s.trim().to_string())
}

fn list_item() -> impl Strategy<Value = String> {
    "[a-z0-9|,\\\\.-]{1,6}"
}

fn field(name: String) -> impl Strategy<Value = FieldSpec> {
    (
        prop::sample::select(SHAPES),
        prop::sample::select(&["core", "hdfs", "yarn", "mapred", "zookeeper"][..]),
        (text(), text(), text()),
        any::<prop::sample::Index>(),
        any::<bool>(),
        prop::option::of(prop::collection::vec(list_item(), 1..4)),
        any::<bool>(),
    )
        .prop_map(move |((tipe, prop, defaults), sub, (unit, interp, advice), pick, has_default, variants, required)| {
            let mut f = FieldSpec::new(name.clone(), sub, tipe);
            f.property = parse_expr(prop).unwrap();
            f.unit = unit;
            f.interp = interp;
            f.advice = advice;
            f.default_raw = has_default.then(|| pick.get(defaults).to_string());
            f.grid_variants = variants;
            if tipe == RTipe::OptionPos {
                f.none_sentinels = if required { vec!["-1".into()] } else { vec!["-1".into(), "0".into()] };
            }
            f.required = required;
            f
        })
}

fn schema() -> impl Strategy<Value = ConfigSchema> {
    prop::collection::btree_set("[a-z]{1,4}(\\.[a-z0-9_-]{1,4}){0,2}", 1..8)
        .prop_flat_map(|names| {
            let fields: Vec<_> = names.into_iter().map(field).collect();
            (fields, "[a-z][a-z0-9_-]{0,8}", any::<bool>())
        })
        .prop_map(|(fields, name, with_cross)| {
            let mut cross = Vec::new();
            let ints: Vec<&FieldSpec> = fields
                .iter()
                .filter(|f| matches!(f.tipe, RTipe::Int | RTipe::Pos | RTipe::NonNeg))
                .collect();
            if with_cross && ints.len() >= 2 {
                cross.push(CrossConstraint {
                    id: "ordered".into(),
                    expr: parse_expr(&format!("field({}) <= field({})", ints[0].name, ints[1].name)).unwrap(),
                    description: "first | second, in order".into(),
                });
            }
            ConfigSchema::new(name, fields, cross).unwrap()
        })
}

proptest! {
    #[test]
    fn manifest_reload_is_identity(s in schema()) {
        let text = s.to_manifest();
        let back = parse_manifest(&text, "ignored").unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.to_manifest(), text);
    }
}

#[test]
fn load_serialize_reload_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hadoop.manifest");
    std::fs::write(&path, rwtc::schema::bundled_hadoop_manifest()).unwrap();
    let loaded = load_schema(&path).unwrap();
    assert_eq!(loaded, rwtc::bundled_hadoop_schema());

    let again = dir.path().join("again.manifest");
    std::fs::write(&again, loaded.to_manifest()).unwrap();
    assert_eq!(load_schema(&again).unwrap(), loaded);

    // Without a [schema] section the file stem names the schema.
    let bare = dir.path().join("desk.manifest");
    std::fs::write(&bare, "[fields]\nx|core|pos||||||||\n").unwrap();
    assert_eq!(load_schema(&bare).unwrap().name(), "desk");
    assert!(load_schema(&dir.path().join("missing.manifest")).is_err());
}
