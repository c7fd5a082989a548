use fwseg::fw::{gfw_solve, FwOptions};
use fwseg::graph::{sym_normalized_laplacian, Graph};
use fwseg::model::{phi, Assignment, Fidelity, PenaltyModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(r: &mut ChaCha8Rng, n: usize) -> Graph<f64> {
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for i in 1..n {
        let p = r.gen_range(0..i);
        edges.push((p, i, 0.5 + r.gen::<f64>()));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if r.gen::<f64>() < 0.5 {
                edges.push((i, j, 0.5 + r.gen::<f64>()));
            }
        }
    }
    Graph::from_edge_list(&edges, n).unwrap()
}

fn main() {
    // uniform-random fidelity classes
    for family in ["uniform", "planted"] {
        let mut r = ChaCha8Rng::seed_from_u64(123);
        let mut fails = 0;
        let mut total = 0;
        let mut tie_fails = 0;
        while total < 200 {
            let n = r.gen_range(2..=4usize);
            let k = r.gen_range(2..=3usize);
            let g = random_graph(&mut r, n);
            let ls = sym_normalized_laplacian(&g);
            let labeled: Vec<(usize, usize)> = match family {
                "uniform" => {
                    let mut l = vec![];
                    for node in 0..n {
                        if r.gen::<f64>() < 0.4 { l.push((node, r.gen_range(0..k))); }
                    }
                    l
                }
                _ => {
                    // planted: class = node index mod k, label ~half the nodes
                    let mut l = vec![];
                    for node in 0..n {
                        if r.gen::<f64>() < 0.5 { l.push((node, node % k)); }
                    }
                    l
                }
            };
            if labeled.is_empty() || labeled.len() >= n { continue; }
            let fid = Fidelity::from_labeled_nodes(n, k, &labeled, 1.0).unwrap();
            let probe = PenaltyModel::new(ls.clone(), fid.clone(), 1.0).unwrap();
            let eps = 0.9 * probe.eps_bar().unwrap().min(probe.eps_tilde());
            let m = PenaltyModel::new(ls.clone(), fid.clone(), eps).unwrap();
            let u0 = fid.initial_assignment();
            // detect gradient ties at u0
            let g0 = m.gradient(&u0);
            let mut has_tie = false;
            for i in 0..n {
                let row = g0.row(i);
                for a in 0..k { for b in (a+1)..k {
                    if (row[a]-row[b]).abs() < 1e-9 { has_tie = true; }
                }}
            }
            let rep = gfw_solve(&m, &u0, &FwOptions::default()).unwrap();
            if rep.iterations == 0 { continue; }
            assert_eq!(phi(&rep.final_u), 0.0);
            total += 1;
            let labels = rep.final_u.labels();
            let e_final = m.energy(&rep.final_u);
            let mut bad = false;
            for i in 0..n {
                for c in 0..k {
                    if c == labels[i] { continue; }
                    let mut fl = labels.clone();
                    fl[i] = c;
                    let e = m.energy(&Assignment::<f64>::from_labels(&fl, k));
                    if e < e_final - 1e-12 { bad = true; }
                }
            }
            if bad { fails += 1; if has_tie { tie_fails += 1; } }
        }
        println!("{family}: {fails}/{total} instances have an improving flip ({tie_fails} of the failures had gradient ties)");
    }
}
