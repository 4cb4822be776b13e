use std::fs;
use std::path::PathBuf;

use refinery::elab::load;
use refinery_core::verify::check_refinement;

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
fn every_example_elaborates_and_verifies() {
    for p in examples() {
        let src = fs::read_to_string(&p).unwrap();
        let m = load(&src).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        for r in &m.refinements {
            let rep = check_refinement(&r.data, &r.forget, &r.oracle, 3)
                .unwrap_or_else(|e| panic!("{}: {}: {e}", p.display(), r.name));
            assert!(rep.pass(), "{}: {}\n{rep}", p.display(), r.name);
        }
    }
}

#[test]
fn internal_output_reelaborates_to_the_same_code() {
    use refinery::ast::Style;
    use refinery::emit::emit;
    for p in examples() {
        let m = load(&fs::read_to_string(&p).unwrap()).unwrap();
        for r in &m.refinements {
            let text = emit(&m, r, Style::Internal);
            let again = load(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", r.name));
            let code = again.code(&r.name).unwrap();
            assert_eq!(**code, *r.data.code, "{}\n{text}", r.name);
            assert_eq!(again.forgets_of(&r.name), r.forget.as_slice(), "{}", r.name);
            assert_eq!(
                emit(&again, &again_refinement(&again, r), Style::Internal),
                text
            );
        }
    }
}

fn again_refinement(
    m: &refinery::elab::Module,
    r: &refinery::elab::Refinement,
) -> refinery::elab::Refinement {
    let mut out = r.clone();
    out.data.code = m.code(&r.name).unwrap().clone();
    out.forget = m.forgets_of(&r.name).to_vec();
    out
}
