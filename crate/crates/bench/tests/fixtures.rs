use regconv_bench::{gaussian_blobs, processed_docs, vocabulary};

#[test]
fn fixtures_are_seeded_and_well_formed() {
    let x = gaussian_blobs(4, 5, 16, 0.2, 9);
    assert_eq!((x.len(), x.dim()), (20, 16));
    x.check_unit_rows(1e-9).unwrap();
    assert_eq!(x, gaussian_blobs(4, 5, 16, 0.2, 9));

    let docs = processed_docs(30, 12, 1);
    assert_eq!(docs.len(), 30);
    assert!(!vocabulary(&docs).is_empty());
    assert_eq!(docs, processed_docs(30, 12, 1));
}
