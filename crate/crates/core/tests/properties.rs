use proptest::prelude::*;
use refinery_core::error::Loc;
use refinery_core::families::{
    check_phi_psi, check_psi_phi, comprehension, op_reindex, points, reindex, truth, BaseMap,
    FiniteFamily, SliceFamily,
};
use refinery_core::value::{arith, ArithOp, Value};

fn family(sizes: &[usize]) -> FiniteFamily {
    FiniteFamily::new(
        points(sizes.len()),
        sizes.iter().map(|&k| points(k)).collect(),
    )
    .unwrap()
}

fn map(targets: &[usize], to: usize) -> BaseMap {
    BaseMap::new(
        targets
            .iter()
            .enumerate()
            .map(|(i, &j)| (Value::int(i as i64), Value::int((j % to) as i64))),
    )
}

proptest! {
    #[test]
    fn integer_arithmetic(a in -1000i64..1000, b in -1000i64..1000) {
        let loc = Loc::new(1, 1);
        let (x, y) = (Value::int(a), Value::int(b));
        prop_assert_eq!(arith(ArithOp::Add, &x, &y, loc).unwrap(), Value::int(a + b));
        prop_assert_eq!(arith(ArithOp::Sub, &x, &y, loc).unwrap(), Value::int(a - b));
        prop_assert_eq!(arith(ArithOp::Mul, &x, &y, loc).unwrap(), Value::int(a * b));
        let q = arith(ArithOp::Div, &x, &y, loc);
        if b == 0 {
            prop_assert!(q.is_err());
        } else {
            prop_assert!(q.unwrap().sem_eq(&Value::rat(a, b)));
        }
    }

    #[test]
    fn rational_arithmetic(a in -50i64..50, b in 1i64..20, c in -50i64..50, d in 1i64..20) {
        let loc = Loc::new(1, 1);
        let (x, y) = (Value::rat(a, b), Value::rat(c, d));
        let sum = arith(ArithOp::Add, &x, &y, loc).unwrap();
        prop_assert!(sum.sem_eq(&Value::rat(a * d + c * b, b * d)));
        let prod = arith(ArithOp::Mul, &x, &y, loc).unwrap();
        prop_assert!(prod.sem_eq(&Value::rat(a * c, b * d)));
        // mixed operands agree with the all-rational result
        let mixed = arith(ArithOp::Add, &Value::int(a), &y, loc).unwrap();
        prop_assert!(mixed.sem_eq(&Value::rat(a * d + c, d)));
    }

    #[test]
    fn reindex_by_identity(sizes in prop::collection::vec(0usize..4, 1..6)) {
        let p = family(&sizes);
        let id = BaseMap::identity(&p.base);
        prop_assert_eq!(reindex(&id, &p, &p.base).unwrap(), p.clone());
        let q = op_reindex(&id, &p, &p.base);
        let lens: Vec<usize> = q.fibres.iter().map(Vec::len).collect();
        prop_assert_eq!(lens, sizes);
    }

    #[test]
    fn reindex_fibre_sizes(
        sizes in prop::collection::vec(0usize..4, 1..5),
        targets in prop::collection::vec(0usize..8, 1..6),
    ) {
        let q = family(&sizes);
        let f = map(&targets, sizes.len());
        let base = points(targets.len());
        let r = reindex(&f, &q, &base).unwrap();
        for (i, &j) in targets.iter().enumerate() {
            prop_assert_eq!(r.fibres[i].len(), sizes[j % sizes.len()]);
        }
    }

    #[test]
    fn op_reindex_sums_fibres(
        sizes in prop::collection::vec(0usize..4, 1..6),
        targets in prop::collection::vec(0usize..8, 6),
        to in 1usize..4,
    ) {
        let p = family(&sizes);
        let f = map(&targets[..sizes.len()], to);
        let q = op_reindex(&f, &p, &points(to));
        for b in 0..to {
            let want: usize = (0..sizes.len()).filter(|&a| targets[a] % to == b).map(|a| sizes[a]).sum();
            prop_assert_eq!(q.fibres[b].len(), want);
        }
        prop_assert_eq!(q.total(), p.total());
        prop_assert!(q.validate().is_ok());
    }

    #[test]
    fn comprehension_and_truth(sizes in prop::collection::vec(0usize..4, 0..6)) {
        let p = family(&sizes);
        prop_assert_eq!(comprehension(&p).len(), sizes.iter().sum::<usize>());
        let t = truth(&p.base);
        prop_assert_eq!(comprehension(&t).len(), sizes.len());
    }

    #[test]
    fn slices_round_trip(
        sizes in prop::collection::vec(0usize..4, 1..5),
        labels in prop::collection::vec(0usize..3, 16),
        d in 1usize..4,
    ) {
        let fam = family(&sizes);
        let mut k = 0;
        let labs = fam
            .fibres
            .iter()
            .map(|fib| {
                fib.iter()
                    .map(|_| {
                        k += 1;
                        Value::int((labels[k - 1] % d) as i64)
                    })
                    .collect()
            })
            .collect();
        let s = SliceFamily { family: fam, labels: labs };
        prop_assert!(check_psi_phi(&s, &points(d)).is_ok());
    }

    #[test]
    fn products_round_trip(sizes in prop::collection::vec(0usize..3, 6), d in 1usize..3, a in 1usize..3) {
        let (db, ab) = (points(d), points(a));
        let base: Vec<Value> = db
            .iter()
            .flat_map(|x| ab.iter().map(move |y| Value::Tuple(vec![x.clone(), y.clone()])))
            .collect();
        let fibres = (0..base.len()).map(|i| points(sizes[i])).collect();
        let x = FiniteFamily::new(base, fibres).unwrap();
        prop_assert!(check_phi_psi(&x, &db, &ab).is_ok());
    }
}
