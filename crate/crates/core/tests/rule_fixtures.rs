mod common;

use std::collections::{BTreeMap, HashSet};

use a11y_core::grpo::default_template;
use a11y_core::rules::{default_catalog, SeverityCounts};
use common::{audit_default, audit_with, manifest, read_fixture};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn manifest_covers_every_rule_twice() {
    let m = manifest();
    assert_eq!(m.schema, 1);
    assert!(m.fixtures.len() >= 48);
    for rule in default_catalog() {
        let n = m.fixtures.iter().filter(|f| f.rule.as_deref() == Some(rule.id)).count();
        assert_eq!(n, 2, "{}", rule.id);
        let violating = m
            .fixtures
            .iter()
            .find(|f| f.rule.as_deref() == Some(rule.id) && !f.expected.is_empty())
            .unwrap();
        assert!(violating.expected.contains_key(rule.id), "{}", rule.id);
    }
}

#[test]
fn fixtures_yield_expected_violations() {
    for f in manifest().fixtures {
        let r = audit_default(&read_fixture(&f.file));
        assert_eq!(r.per_rule(), f.expected, "{}", f.file);
    }
}

#[test]
fn repair_removes_the_rule_and_adds_nothing() {
    let m = manifest();
    for rule in default_catalog() {
        let pair: Vec<_> = m
            .fixtures
            .iter()
            .filter(|f| f.rule.as_deref() == Some(rule.id))
            .collect();
        let before = audit_default(&read_fixture(&pair[0].file)).per_rule();
        let after = audit_default(&read_fixture(&pair[1].file)).per_rule();
        assert!(before.get(rule.id).copied().unwrap_or(0) > 0, "{}", rule.id);
        assert!(!after.contains_key(rule.id), "{}", rule.id);
        for (id, n) in &after {
            assert!(
                before.get(id).is_some_and(|b| b >= n),
                "{}: repair introduced {id}",
                rule.id
            );
        }
    }
}

#[test]
fn counts_match_recount() {
    for f in manifest().fixtures {
        let r = audit_default(&read_fixture(&f.file));
        let mut recount = SeverityCounts::default();
        for v in &r.violations {
            assert!(!v.nodes.is_empty());
            *recount.get_mut(v.severity) += v.nodes.len() as u64;
        }
        assert_eq!(recount, r.counts, "{}", f.file);
    }
}

#[test]
fn audits_are_deterministic() {
    for f in manifest().fixtures {
        let html = read_fixture(&f.file);
        let doc = a11y_core::parse_html(&html).unwrap();
        let a = audit_default(&html).to_file(&doc).to_json_pretty();
        let b = audit_default(&html).to_file(&doc).to_json_pretty();
        assert_eq!(a, b, "{}", f.file);
    }
}

#[test]
fn rule_order_does_not_change_results() {
    let mut rng = ChaCha8Rng::seed_from_u64(3407);
    let fixtures = manifest().fixtures;
    for _ in 0..10 {
        let mut catalog = default_catalog();
        catalog.shuffle(&mut rng);
        for f in &fixtures {
            let html = read_fixture(&f.file);
            let shuffled = audit_with(&html, &catalog);
            let base = audit_default(&html);
            assert_eq!(shuffled.per_rule(), base.per_rule(), "{}", f.file);
            assert_eq!(shuffled.counts, base.counts);
            if f.expected.is_empty() {
                assert!(shuffled.is_clean(), "{}", f.file);
            }
        }
    }
}

#[test]
fn fixture_nodes_are_elements() {
    for f in manifest().fixtures {
        let html = read_fixture(&f.file);
        let doc = a11y_core::parse_html(&html).unwrap();
        for v in audit_default(&html).violations {
            let unique: HashSet<_> = v.nodes.iter().collect();
            assert_eq!(unique.len(), v.nodes.len());
            for n in v.nodes {
                assert!(doc.node(n).is_element(), "{} {}", f.file, v.rule_id);
            }
        }
    }
}

/// Every choice vector of the training template: moving any slot to its last
/// (accessible) choice never raises any rule's count.
#[test]
fn template_upgrades_are_monotone() {
    let t = default_template();
    let sizes: Vec<usize> = t.slots().iter().map(|s| s.len()).collect();
    let total: usize = sizes.iter().product();
    let mut cache: BTreeMap<Vec<usize>, BTreeMap<String, u64>> = BTreeMap::new();
    let mut per_rule = |v: &Vec<usize>| {
        cache
            .entry(v.clone())
            .or_insert_with(|| audit_default(&t.render(v)).per_rule())
            .clone()
    };
    for mut code in 0..total {
        let mut v = Vec::with_capacity(sizes.len());
        for &s in &sizes {
            v.push(code % s);
            code /= s;
        }
        let before = per_rule(&v);
        for (j, &s) in sizes.iter().enumerate() {
            let mut up = v.clone();
            up[j] = s - 1;
            for (id, n) in per_rule(&up) {
                assert!(before.get(&id).is_some_and(|&b| b >= n), "{v:?} slot {j} raised {id}");
            }
        }
    }
}
