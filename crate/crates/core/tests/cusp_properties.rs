use cusp_transfer::cusps::{build_cusp_table, direct_cusp_parameter};
use cusp_transfer::dirichlet::DirichletCharacter;
use cusp_transfer::exactnum::{gcd, psi, Rational, SL2Z};

fn brute_orbit_count(n: i64) -> usize {
    let units: Vec<i64> = (0..n).filter(|&u| gcd(u, n) == 1).collect();
    let mut seen = std::collections::HashSet::new();
    let mut count = 0;
    for c in 0..n {
        for d in 0..n {
            if gcd(gcd(c, d), n) != 1 || seen.contains(&(c, d)) {
                continue;
            }
            count += 1;
            for &u in &units {
                for j in 0..n {
                    seen.insert(((u * c) % n, (u * (d + j * c)) % n));
                }
            }
        }
    }
    count
}

#[test]
fn census_small_levels() {
    for n in 1..=60 {
        let t = build_cusp_table(n, &DirichletCharacter::trivial(n)).unwrap();
        assert_eq!(t.len(), brute_orbit_count(n), "N={n}");
        assert_eq!(t.classes.iter().map(|c| c.m).sum::<i64>(), psi(n), "N={n}");
    }
}

#[test]
fn widths_are_least_periods() {
    for n in 2..=100 {
        let t = build_cusp_table(n, &DirichletCharacter::trivial(n)).unwrap();
        for c in &t.classes {
            let least = (1..).find(|&m| (m * c.gamma.c * c.gamma.c) % n == 0).unwrap();
            assert_eq!(c.m, least, "N={n} class {}", c.cusp());
        }
    }
}

#[test]
fn mu_matches_direct_stabilizer() {
    for n in 2..=100 {
        for chi in DirichletCharacter::all(n) {
            let t = build_cusp_table(n, &chi).unwrap();
            for c in &t.classes {
                assert_eq!(c.mu, direct_cusp_parameter(&c.gamma, c.m, &chi), "N={n} chi={chi} cusp={}", c.cusp());
            }
        }
    }
}

#[test]
fn stabilizer_independent_of_translation() {
    for n in [8, 9, 12, 16, 27, 36, 50] {
        for chi in DirichletCharacter::all(n) {
            let t = build_cusp_table(n, &chi).unwrap();
            for c in &t.classes {
                let shifted = c.gamma * SL2Z::translation(1);
                assert_eq!(direct_cusp_parameter(&shifted, c.m, &chi), c.mu);
            }
        }
    }
}

#[test]
fn unit_action_is_group_action() {
    for n in 2..=100 {
        let t = build_cusp_table(n, &DirichletCharacter::trivial(n)).unwrap();
        for cls in &t.classes {
            for &a in t.units() {
                let img = t.unit_action(a, cls.id).unwrap();
                assert_eq!(t.class(img).m, cls.m);
                let inv = cusp_transfer::exactnum::mod_inv(a, n).unwrap();
                assert_eq!(t.unit_action(inv, img).unwrap(), cls.id);
                for &b in t.units() {
                    let ab = t.unit_action((a * b) % n, cls.id).unwrap();
                    assert_eq!(ab, t.unit_action(a, t.unit_action(b, cls.id).unwrap()).unwrap(), "N={n}");
                }
            }
        }
    }
}

#[test]
fn unit_action_shifts_mu_by_multiplication() {
    for n in 2..=100 {
        for chi in DirichletCharacter::all(n) {
            let t = build_cusp_table(n, &chi).unwrap();
            for cls in &t.classes {
                for &a in t.units() {
                    let img = t.unit_action(a, cls.id).unwrap();
                    let diff = t.class(img).mu - Rational::from(a) * cls.mu;
                    assert!(diff.is_integer(), "N={n} a={a} cusp={}", cls.cusp());
                }
            }
        }
    }
}
