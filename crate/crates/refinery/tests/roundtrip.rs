use std::fs;
use std::path::PathBuf;

use refinery::elab::load;
use refinery::parse::parse;

fn examples() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "rfn"))
        .collect();
    out.sort();
    out
}

#[test]
fn printing_is_a_fixed_point_of_parsing() {
    for p in examples() {
        let src = fs::read_to_string(&p).unwrap();
        let once = parse(&src).unwrap().to_string();
        let twice = parse(&once)
            .unwrap_or_else(|e| panic!("{}: {e}\n{once}", p.display()))
            .to_string();
        assert_eq!(once, twice, "{}", p.display());
    }
}

#[test]
fn printed_files_elaborate_to_the_same_types() {
    for p in examples() {
        let src = fs::read_to_string(&p).unwrap();
        let a = load(&src).unwrap();
        let b = load(&parse(&src).unwrap().to_string()).unwrap();
        assert_eq!(a.codes, b.codes, "{}", p.display());
        assert_eq!(a.forgets, b.forgets, "{}", p.display());
        let names = |m: &refinery::elab::Module| {
            m.refinements
                .iter()
                .map(|r| r.name.clone())
                .collect::<Vec<_>>()
        };
        assert_eq!(names(&a), names(&b));
        for (x, y) in a.refinements.iter().zip(&b.refinements) {
            assert_eq!(x.data.code, y.data.code, "{}", x.name);
        }
    }
}
