//! Numeric types, operator generators, compressions and frame auditing.

pub mod frame;
pub mod linalg;
pub mod operator;
pub mod spec;

pub use frame::{audit_frame, compress, compress_with, DenseSequence, Frame, FrameAudit, TOL_ORTHO};
pub use linalg::{cx, inner, C64, CMat, CVec, Complement};
pub use operator::{hermitian_parts, Bandwidth, Operator, OperatorKind, OperatorTuple, SelfAdjointTuple};
pub use spec::{load_operator, parse_complex, parse_complex_list, parse_matrix, OperatorSpec};

#[cfg(test)]
mod tests {
    use super::linalg::{unit, ONE, ZERO};
    use super::*;

    #[test]
    fn hermitian_parts_of_nilpotent_block() {
        let m = CMat::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        let s = hermitian_parts(&OperatorTuple::new(vec![m.clone()]).unwrap());
        let re = CMat::from_row_slice(2, 2, &[ZERO, cx(0.5, 0.0), cx(0.5, 0.0), ZERO]);
        let im = CMat::from_row_slice(2, 2, &[ZERO, cx(0.0, -0.5), cx(0.0, 0.5), ZERO]);
        assert_eq!(s.parts()[0], re);
        assert_eq!(s.parts()[1], im);
        let back = &s.parts()[0] + &s.parts()[1] * cx(0.0, 1.0);
        assert_eq!(back, m);
    }

    #[test]
    fn hermitian_input_has_zero_imaginary_part() {
        let h = CMat::from_row_slice(2, 2, &[ONE, cx(0.0, 2.0), cx(0.0, -2.0), ZERO]);
        let s = hermitian_parts(&OperatorTuple::new(vec![h.clone()]).unwrap());
        assert_eq!(s.parts()[0], h);
        assert!(s.parts()[1].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn compress_examples() {
        let t = Operator::diagonal(&[cx(1.0, 0.0), cx(2.0, 0.0), cx(3.0, 0.0)]).unwrap();
        let tt = OperatorTuple::single(&t);
        let full = compress(&tt, &Frame::standard(3)).unwrap();
        assert_eq!(full.parts()[0], *t.matrix());
        let f = Frame::new(vec![unit(3, 0), unit(3, 2)], TOL_ORTHO).unwrap();
        let c = compress(&tt, &f).unwrap();
        assert_eq!(c.parts()[0], CMat::from_diagonal_element(2, 2, ONE) + CMat::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, cx(2.0, 0.0)]));

        let s = OperatorTuple::single(&Operator::shift(4).unwrap());
        let f = Frame::new(vec![unit(4, 0), unit(4, 2)], TOL_ORTHO).unwrap();
        assert!(compress(&s, &f).unwrap().parts()[0].iter().all(|z| *z == ZERO));
    }

    #[test]
    fn compress_rejects_bad_frames() {
        let s = OperatorTuple::single(&Operator::shift(3).unwrap());
        let bad = Frame::unchecked(vec![unit(3, 0), unit(3, 0)], TOL_ORTHO);
        assert!(matches!(compress(&s, &bad), Err(crate::error::Error::Frame(_))));
    }

    #[test]
    fn audit_examples() {
        let a = audit_frame(&Frame::standard(4));
        assert_eq!((a.max_offdiag, a.max_norm_dev), (0.0, 0.0));
        let v = (unit(2, 0) + unit(2, 1)).unscale(2f64.sqrt());
        let a = audit_frame(&Frame::unchecked(vec![unit(2, 0), v], TOL_ORTHO));
        assert!((a.max_offdiag - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dense_sequence_needs_full_rank() {
        assert!(DenseSequence::new(vec![unit(2, 0), unit(2, 0)]).is_err());
        assert_eq!(DenseSequence::standard(3).len(), 3);
    }
}
