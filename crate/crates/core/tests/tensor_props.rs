use proptest::prelude::*;
use scnv_core::tensor::{elementwise, matmul, ElementwiseOp};
use scnv_core::Tensor;

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, n)
}

fn same_shape_triple() -> impl Strategy<Value = (Vec<usize>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    prop::collection::vec(1usize..5, 1..4).prop_flat_map(|shape| {
        let n = shape.iter().product();
        (Just(shape), values(n), values(n), values(n))
    })
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Tensor> {
    prop::collection::vec(-1.0..=1.0f64, rows * cols).prop_map(move |d| Tensor::from_vec(&[rows, cols], d).unwrap())
}

proptest! {
    #[test]
    fn add_and_mul_commute((shape, a, b, _) in same_shape_triple()) {
        let a = Tensor::from_vec(&shape, a).unwrap();
        let b = Tensor::from_vec(&shape, b).unwrap();
        for op in [ElementwiseOp::Add, ElementwiseOp::Mul] {
            prop_assert_eq!(elementwise(&a, &b, op).unwrap(), elementwise(&b, &a, op).unwrap());
        }
    }

    // Integer-valued entries keep sums and products exact, so association
    // order cannot matter.
    #[test]
    fn add_and_mul_associate((shape, a, b, c) in same_shape_triple()) {
        let t = |v: Vec<f64>| Tensor::from_vec(&shape, v.iter().map(|x| x.trunc()).collect()).unwrap();
        let (a, b, c) = (t(a), t(b), t(c));
        for op in [ElementwiseOp::Add, ElementwiseOp::Mul] {
            let left = elementwise(&elementwise(&a, &b, op).unwrap(), &c, op).unwrap();
            let right = elementwise(&a, &elementwise(&b, &c, op).unwrap(), op).unwrap();
            prop_assert_eq!(left, right);
        }
    }

    #[test]
    fn matmul_associates(
        (a, b, c) in (1usize..=16, 1usize..=16, 1usize..=16, 1usize..=16)
            .prop_flat_map(|(m, k, n, p)| (matrix(m, k), matrix(k, n), matrix(n, p)))
    ) {
        let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
        let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left.shape(), right.shape());
        for (x, y) in left.data().iter().zip(right.data()) {
            prop_assert!((x - y).abs() <= 1e-9, "{} vs {}", x, y);
        }
    }

    #[test]
    fn reshape_flatten_round_trip((shape, a, _, _) in same_shape_triple()) {
        let t = Tensor::from_vec(&shape, a).unwrap();
        let flat = t.flatten();
        prop_assert_eq!(flat.shape(), &[t.len()][..]);
        let back = flat.reshape(&shape).unwrap();
        prop_assert_eq!(&back, &t);
        let bits = |t: &Tensor| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back), bits(&t));
    }
}

#[test]
fn shape_errors() {
    let a = Tensor::zeros(&[2, 3]).unwrap();
    let b = Tensor::zeros(&[3, 2]).unwrap();
    assert!(matches!(elementwise(&a, &b, ElementwiseOp::Add), Err(scnv_core::Error::ShapeMismatch(_))));
    assert!(matches!(matmul(&a, &a), Err(scnv_core::Error::ShapeMismatch(_))));
    assert!(a.reshape(&[5]).is_err());
}
