//! Loading reward matrices from disk.

use std::io::Write;

use mpbandit::experiment::MatrixSource;
use mpbandit::model::{builtin_u1, builtin_u2, RewardDist, RewardMatrix};
use mpbandit::Error;

fn write_temp(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn builtins_round_trip_through_files() {
    for m in [builtin_u1(), builtin_u2()] {
        let f = write_temp(&m.to_file_format());
        assert_eq!(RewardMatrix::load(f.path()).unwrap(), m);
    }
}

#[test]
fn comments_and_gaussian() {
    let f = write_temp("# two players\n2 3\n\n0.1 0.2 0.3\n0.4 0.5 0.6\n# noise\ngaussian 0.25\n");
    let m = RewardMatrix::load(f.path()).unwrap();
    assert_eq!(m.players(), 2);
    assert_eq!(m.mean(1, 2), 0.6);
    assert_eq!(m.dist(), RewardDist::Gaussian { sigma2: 0.25 });
}

#[test]
fn file_source_loads() {
    let f = write_temp("1 2\n0.5 0.25\nbernoulli\n");
    let src: MatrixSource = f.path().to_str().unwrap().parse().unwrap();
    assert_eq!(src.load().unwrap().mean(0, 1), 0.25);
    assert_eq!("u1".parse::<MatrixSource>().unwrap(), MatrixSource::U1);
}

#[test]
fn bad_files_report_the_line() {
    let cases = [
        ("2 2\n0.1 0.2\n0.3\nbernoulli\n", 3),
        ("1 2\n0.1 1.5\nbernoulli\n", 2),
        ("1 1\n0.5\npoisson\n", 3),
        ("1 1\n0.5\nbernoulli\nextra\n", 4),
        ("x 1\n", 1),
    ];
    for (text, line) in cases {
        let f = write_temp(text);
        match RewardMatrix::load(f.path()) {
            Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
}

#[test]
fn more_players_than_arms_is_rejected() {
    let f = write_temp("2 1\n0.5\n0.5\nbernoulli\n");
    assert!(RewardMatrix::load(f.path()).is_err());
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = RewardMatrix::load(dir.path().join("nope.txt")).unwrap_err();
    assert!(matches!(err, Error::Io(_)));
}
