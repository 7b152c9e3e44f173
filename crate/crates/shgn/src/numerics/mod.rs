//! Dense f64 tensors, a reverse-mode autodiff tape, and a finite-difference
//! gradient checker. Everything upstream (graph encoder, decoder, losses) is
//! expressed through these ops, so one gradient check can cover the whole
//! model.

mod gradcheck;
mod params;
mod rng;
mod tape;
mod tensor;

pub use gradcheck::{grad_check, GradCheckFailure, GradCheckReport, GradMode, LossEval};
pub use params::{GradStore, ParamId, ParamStore};
pub use rng::{fnv1a64, SeededRng};
pub use tape::{Tape, Var};
pub use tensor::Tensor;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Result;

    fn fd_check_single<F>(rows: usize, cols: usize, build: F)
    where
        F: Fn(&mut Tape, Var) -> Result<Var>,
    {
        let mut store = ParamStore::new();
        let mut rng = SeededRng::new(7);
        let mut t = Tensor::zeros(rows, cols);
        for v in t.data_mut() {
            *v = rng.uniform(-1.0, 1.0);
        }
        let x = store.register("x", t).unwrap();
        let report = grad_check(
            &mut store,
            |store, mode| {
                let mut tape = Tape::new();
                let xv = tape.param(store, x);
                let out = build(&mut tape, xv)?;
                let loss = tape.sum_all(out);
                let value = tape.value(loss).item()?;
                let grads = match mode {
                    GradMode::WithGrads => Some(tape.backward(loss, store)?),
                    GradMode::ValueOnly => None,
                };
                Ok(LossEval { value, grads })
            },
            1e-5,
            1e-6,
        )
        .unwrap();
        assert!(
            report.passed(),
            "max rel err {} failures {:?}",
            report.max_rel_err,
            report.failures
        );
    }

    #[test]
    fn softmax_of_zeros_is_uniform_thirds() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::row(&[0.0, 0.0, 0.0]));
        let y = tape.softmax(x);
        for &v in tape.value(y).data() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let mut rng = SeededRng::new(3);
        for _ in 0..50 {
            let mut t = Tensor::zeros(4, 6);
            for v in t.data_mut() {
                *v = rng.uniform(-10.0, 10.0);
            }
            let mut tape = Tape::new();
            let x = tape.constant(t);
            let y = tape.softmax(x);
            let yv = tape.value(y);
            for r in 0..4 {
                let s: f64 = yv.row_slice(r).iter().sum();
                assert!((s - 1.0).abs() < 1e-9);
                assert!(yv.row_slice(r).iter().all(|&p| p >= 0.0));
            }
        }
    }

    #[test]
    fn cross_entropy_vanishes_at_large_margin() {
        // One-hot-correct logits with margin 50 drive the loss below 1e-9.
        let mut tape = Tape::new();
        let logits = tape.constant(Tensor::row(&[50.0, 0.0, 0.0, 0.0]));
        let loss = tape.cross_entropy_sum(logits, &[0], &[true]).unwrap();
        assert!(tape.value(loss).item().unwrap() < 1e-9);
    }

    #[test]
    fn cross_entropy_uniform_is_log_vocab() {
        let mut tape = Tape::new();
        let logits = tape.constant(Tensor::zeros(4, 11));
        let loss = tape
            .cross_entropy_sum(logits, &[0, 3, 7, 10], &[true; 4])
            .unwrap();
        let expected = 4.0 * (11.0f64).ln();
        assert!((tape.value(loss).item().unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_rejects_out_of_vocab_target() {
        let mut tape = Tape::new();
        let logits = tape.constant(Tensor::zeros(1, 5));
        assert!(tape.cross_entropy_sum(logits, &[5], &[true]).is_err());
    }

    #[test]
    fn matmul_backward_matches_finite_differences() {
        // Random 3x4 * 4x2, gradients of both factors.
        let mut store = ParamStore::new();
        let mut rng = SeededRng::new(11);
        let mut a = Tensor::zeros(3, 4);
        let mut b = Tensor::zeros(4, 2);
        for v in a.data_mut() {
            *v = rng.uniform(-1.0, 1.0);
        }
        for v in b.data_mut() {
            *v = rng.uniform(-1.0, 1.0);
        }
        let a = store.register("a", a).unwrap();
        let b = store.register("b", b).unwrap();
        let report = grad_check(
            &mut store,
            |store, mode| {
                let mut tape = Tape::new();
                let av = tape.param(store, a);
                let bv = tape.param(store, b);
                let prod = tape.matmul(av, bv)?;
                // Square the output so gradients are input-dependent.
                let sq = tape.mul(prod, prod)?;
                let loss = tape.sum_all(sq);
                let value = tape.value(loss).item()?;
                let grads = match mode {
                    GradMode::WithGrads => Some(tape.backward(loss, store)?),
                    GradMode::ValueOnly => None,
                };
                Ok(LossEval { value, grads })
            },
            1e-5,
            1e-6,
        )
        .unwrap();
        assert!(report.passed(), "{:?}", report.failures);
    }

    #[test]
    fn elementwise_ops_pass_grad_check() {
        fd_check_single(3, 5, |tape, x| {
            let s = tape.sigmoid(x);
            let r = tape.relu(s);
            let m = tape.mul(r, x)?;
            tape.add(m, x)
        });
        fd_check_single(2, 6, |tape, x| Ok(tape.softmax(x)));
        fd_check_single(4, 3, |tape, x| {
            let t = tape.transpose(x);
            tape.matmul(x, t)
        });
        fd_check_single(3, 4, |tape, x| {
            let parts = tape.split_heads(x, 2)?;
            let joined = tape.concat_cols(&parts)?;
            let rows = tape.slice_rows(joined, 1, 2)?;
            tape.sum_axis(rows, 0)
        });
    }

    #[test]
    fn layer_norm_passes_grad_check() {
        let mut store = ParamStore::new();
        let mut rng = SeededRng::new(23);
        let mut x = Tensor::zeros(3, 6);
        for v in x.data_mut() {
            *v = rng.uniform(-2.0, 2.0);
        }
        let mut gain = Tensor::zeros(1, 6);
        for v in gain.data_mut() {
            *v = rng.uniform(0.5, 1.5);
        }
        let x = store.register("x", x).unwrap();
        let gain = store.register("gain", gain).unwrap();
        let bias = store.register("bias", Tensor::zeros(1, 6)).unwrap();
        let report = grad_check(
            &mut store,
            |store, mode| {
                let mut tape = Tape::new();
                let xv = tape.param(store, x);
                let gv = tape.param(store, gain);
                let bv = tape.param(store, bias);
                let y = tape.layer_norm(xv, gv, bv, 1e-5)?;
                let sq = tape.mul(y, y)?;
                let loss = tape.sum_all(sq);
                let value = tape.value(loss).item()?;
                let grads = match mode {
                    GradMode::WithGrads => Some(tape.backward(loss, store)?),
                    GradMode::ValueOnly => None,
                };
                Ok(LossEval { value, grads })
            },
            1e-5,
            1e-6,
        )
        .unwrap();
        assert!(report.passed(), "{:?}", report.failures);
    }

    #[test]
    fn losses_pass_grad_check() {
        let mut store = ParamStore::new();
        let mut rng = SeededRng::new(31);
        let mut logits = Tensor::zeros(4, 7);
        for v in logits.data_mut() {
            *v = rng.uniform(-2.0, 2.0);
        }
        let mut blogits = Tensor::zeros(5, 1);
        for v in blogits.data_mut() {
            *v = rng.uniform(-2.0, 2.0);
        }
        let mut table = Tensor::zeros(6, 3);
        for v in table.data_mut() {
            *v = rng.uniform(-1.0, 1.0);
        }
        let logits = store.register("logits", logits).unwrap();
        let blogits = store.register("blogits", blogits).unwrap();
        let table = store.register("table", table).unwrap();
        let report = grad_check(
            &mut store,
            |store, mode| {
                let mut tape = Tape::new();
                let lv = tape.param(store, logits);
                let bv = tape.param(store, blogits);
                let tv = tape.param(store, table);
                let ce = tape
                    .cross_entropy_sum(lv, &[1, 2, 0, 6], &[true, true, false, true])?;
                let bce = tape.bce_mean(bv, &[1.0, 0.0, 1.0, 1.0, 0.0])?;
                let emb = tape.embedding_lookup(tv, &[0, 2, 2, 5])?;
                let esum = tape.sum_all(emb);
                let esq = tape.mul(esum, esum)?;
                let partial = tape.add(ce, bce)?;
                let loss = tape.add(partial, esq)?;
                let value = tape.value(loss).item()?;
                let grads = match mode {
                    GradMode::WithGrads => Some(tape.backward(loss, store)?),
                    GradMode::ValueOnly => None,
                };
                Ok(LossEval { value, grads })
            },
            1e-5,
            1e-6,
        )
        .unwrap();
        assert!(report.passed(), "{:?}", report.failures);
    }

    #[test]
    fn add_backward_distributes_unchanged_and_concat_splits_exactly() {
        let mut store = ParamStore::new();
        let a = store.register("a", Tensor::row(&[1.0, 2.0])).unwrap();
        let b = store.register("b", Tensor::row(&[3.0, 4.0])).unwrap();
        let mut tape = Tape::new();
        let av = tape.param(&store, a);
        let bv = tape.param(&store, b);
        let sum = tape.add(av, bv).unwrap();
        let cat = tape.concat_cols(&[sum, av]).unwrap();
        let weights = tape.constant(Tensor::from_vec(4, 1, vec![1.5, -2.5, 0.25, 8.0]).unwrap());
        let weighted = tape.matmul(cat, weights).unwrap();
        let loss = tape.sum_all(weighted);
        let grads = tape.backward(loss, &store).unwrap();
        // add passes gradients through unchanged; concat splits them exactly.
        assert_eq!(grads.get(b).unwrap().data(), &[1.5, -2.5]);
        assert_eq!(grads.get(a).unwrap().data(), &[1.5 + 0.25, -2.5 + 8.0]);
    }

    #[test]
    fn gradient_of_unused_parameter_is_exactly_zero() {
        let mut store = ParamStore::new();
        let used = store.register("used", Tensor::row(&[2.0])).unwrap();
        let unused = store.register("unused", Tensor::row(&[5.0])).unwrap();
        let mut tape = Tape::new();
        let uv = tape.param(&store, used);
        let _ = tape.param(&store, unused);
        let loss = tape.sum_all(uv);
        let grads = tape.backward(loss, &store).unwrap();
        assert!(grads.get(unused).is_none());
        assert_eq!(grads.get(used).unwrap().data(), &[1.0]);
    }

    #[test]
    fn identical_forward_passes_are_bit_identical() {
        let run = || {
            let mut rng = SeededRng::new(99);
            let mut t = Tensor::zeros(3, 3);
            for v in t.data_mut() {
                *v = rng.uniform(-1.0, 1.0);
            }
            let mut tape = Tape::new();
            let x = tape.constant(t);
            let s = tape.softmax(x);
            let m = tape.matmul(s, x).unwrap();
            let l = tape.sum_all(m);
            tape.value(l).item().unwrap()
        };
        assert_eq!(run().to_bits(), run().to_bits());
    }

    #[test]
    fn bce_on_empty_set_is_exactly_zero() {
        let mut tape = Tape::new();
        let logits = tape.constant(Tensor::zeros(0, 1));
        let loss = tape.bce_mean(logits, &[]).unwrap();
        assert_eq!(tape.value(loss).item().unwrap(), 0.0);
    }

    #[test]
    fn shape_mismatch_names_op() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::zeros(2, 3));
        let b = tape.constant(Tensor::zeros(3, 3));
        let err = tape.add(a, b).unwrap_err();
        assert!(err.to_string().contains("add"));
    }
}
