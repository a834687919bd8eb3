use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use tempfile::TempDir;

fn otsske(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otsske"))
        .args(args)
        .env_remove("OTSSKE_DETERMINISTIC")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SMALL: [&str; 6] = ["--t", "4", "--n", "8", "--N", "3"];

fn keygen(dir: &TempDir) -> std::path::PathBuf {
    let keys = dir.path().join("keys");
    let mut args = vec!["keygen", "--seed", "1", "--out", p(&keys)];
    args.extend(SMALL);
    let out = otsske(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    keys
}

#[test]
fn keygen_sign_verify_pipeline() {
    let dir = TempDir::new().unwrap();
    let keys = keygen(&dir);
    let msg = dir.path().join("msg");
    let data: Vec<u8> = (0..1024u32)
        .map(|i| (i.wrapping_mul(2654435761) >> 13) as u8)
        .collect();
    std::fs::write(&msg, data).unwrap();
    for (session, variant) in [("0", "compressed"), ("2", "full")] {
        let sig = dir.path().join(format!("sig-{session}"));
        let out = otsske(&[
            "sign",
            "--keys",
            p(&keys),
            "--session",
            session,
            "--in",
            p(&msg),
            "--out",
            p(&sig),
            "--variant",
            variant,
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert!(!keys.join(format!("session-{session}.bin")).exists());
        let ok = otsske(&[
            "verify",
            "--keys",
            p(&keys),
            "--session",
            session,
            "--in",
            p(&msg),
            "--sig",
            p(&sig),
        ]);
        assert_eq!(code(&ok), 0);
        // Bound to its session.
        let wrong = otsske(&[
            "verify",
            "--keys",
            p(&keys),
            "--session",
            "1",
            "--in",
            p(&msg),
            "--sig",
            p(&sig),
        ]);
        assert_eq!(code(&wrong), 1);
        // A session can sign once.
        let again = otsske(&[
            "sign",
            "--keys",
            p(&keys),
            "--session",
            session,
            "--in",
            p(&msg),
            "--out",
            p(&sig),
        ]);
        assert_eq!(code(&again), 2);
    }
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let keys = keygen(&dir);
    let msg = dir.path().join("msg");
    std::fs::write(&msg, b"hello").unwrap();
    let sig = dir.path().join("sig");
    let out = otsske(&[
        "sign",
        "--keys",
        p(&keys),
        "--session",
        "0",
        "--in",
        p(&msg),
        "--out",
        p(&sig),
    ]);
    assert_eq!(code(&out), 0);

    std::fs::write(dir.path().join("junk"), b"not a signature").unwrap();
    let junk = otsske(&[
        "verify",
        "--keys",
        p(&keys),
        "--session",
        "0",
        "--in",
        p(&msg),
        "--sig",
        p(&dir.path().join("junk")),
    ]);
    assert_eq!(code(&junk), 2);

    let out_of_range = otsske(&[
        "verify",
        "--keys",
        p(&keys),
        "--session",
        "3",
        "--in",
        p(&msg),
        "--sig",
        p(&sig),
    ]);
    assert_eq!(code(&out_of_range), 2);

    let mut pk = std::fs::read(keys.join("pk.bin")).unwrap();
    pk[20] ^= 0x40;
    std::fs::write(keys.join("pk.bin"), pk).unwrap();
    let bad_key = otsske(&[
        "verify",
        "--keys",
        p(&keys),
        "--session",
        "0",
        "--in",
        p(&msg),
        "--sig",
        p(&sig),
    ]);
    assert_eq!(code(&bad_key), 2);
    assert!(!bad_key.stderr.is_empty());

    assert_eq!(code(&otsske(&["verify"])), 2);
    assert_eq!(
        code(&otsske(&[
            "setup",
            "--t",
            "1",
            "--out",
            p(&dir.path().join("x"))
        ])),
        2
    );
    assert_eq!(code(&otsske(&["bench", "--reps", "0"])), 2);
}

#[test]
fn demo_is_deterministic_and_matches_golden() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    assert_eq!(
        code(&otsske(&[
            "demo",
            "--seed",
            "7",
            "--sessions",
            "3",
            "--out",
            p(&a)
        ])),
        0
    );
    assert_eq!(
        code(&otsske(&[
            "demo",
            "--seed",
            "7",
            "--sessions",
            "3",
            "--threaded",
            "--out",
            p(&b)
        ])),
        0
    );
    let a = std::fs::read(a).unwrap();
    assert_eq!(a, std::fs::read(b).unwrap());
    let golden = std::fs::read(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../core/tests/data/demo_seed7.txt"
    ))
    .unwrap();
    assert_eq!(a, golden);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().filter(|l| *l == "VERDICT true").count(), 3);

    let env = Command::new(env!("CARGO_BIN_EXE_otsske"))
        .args(["demo", "--sessions", "1"])
        .args(SMALL)
        .env("OTSSKE_DETERMINISTIC", "1")
        .output()
        .unwrap();
    let seeded = otsske(&[
        "demo",
        "--seed",
        "0",
        "--sessions",
        "1",
        "--t",
        "4",
        "--n",
        "8",
        "--N",
        "3",
    ]);
    assert_eq!(env.stdout, seeded.stdout);
}

#[test]
fn demo_rejects_too_many_sessions() {
    let out = otsske(&[
        "demo",
        "--seed",
        "1",
        "--N",
        "2",
        "--t",
        "2",
        "--n",
        "4",
        "--sessions",
        "3",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn game_passes() {
    let out = otsske(&["game", "--seed", "3", "--t", "4", "--n", "8", "--N", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("same-message   verified (allowed)"));
    for strategy in ["replay", "reaggregate", "cross-session", "mix-and-match"] {
        assert!(
            text.lines()
                .filter(|l| l.contains(strategy))
                .all(|l| l.contains("rejected")),
            "{text}"
        );
    }
}

#[test]
fn bench_report_schema() {
    let dir = TempDir::new().unwrap();
    let kv = dir.path().join("bench.kv");
    let out = otsske(&[
        "bench",
        "--reps",
        "1",
        "--warmup",
        "0",
        "--seed",
        "1",
        "--t",
        "4",
        "--n",
        "8",
        "--N",
        "2",
        "--out",
        p(&kv),
    ]);
    assert_eq!(code(&out), 0);
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("n/a") && table.contains("388.6"));
    let kv = std::fs::read_to_string(kv).unwrap();
    for key in [
        "otsske.keygen.v_ms",
        "otsske.keygen.aux_ms",
        "otsske.keygen.sk_ms",
        "otsske.sign_ms",
        "otsske.verify_ms",
        "ecdsa.keygen_ms",
        "ecdsa.sign_ms",
        "ecdsa.verify_ms",
        "counts.sign_pairings",
        "counts.verify_pairings",
    ] {
        assert!(
            kv.lines().any(|l| l.starts_with(&format!("{key}="))),
            "missing {key}"
        );
    }
    assert!(kv.contains("counts.sign_pairings=0\n") && kv.contains("counts.verify_pairings=3\n"));
    assert!(kv.contains("otsske.sign.stddev_ms=n/a\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn corrupted_files_never_verify(
        which in 0usize..3,
        pos in any::<prop::sample::Index>(),
        junk in proptest::collection::vec(any::<u8>(), 0..200),
        truncate in any::<bool>(),
    ) {
        let dir = TempDir::new().unwrap();
        let keys = dir.path().join("keys");
        let out = otsske(&["keygen", "--seed", "5", "--t", "2", "--n", "2", "--N", "1", "--out", p(&keys)]);
        prop_assert_eq!(code(&out), 0);
        let msg = dir.path().join("msg");
        std::fs::write(&msg, b"m").unwrap();
        let sig = dir.path().join("sig");
        prop_assert_eq!(code(&otsske(&["sign", "--keys", p(&keys), "--session", "0", "--in", p(&msg), "--out", p(&sig)])), 0);

        let target = [keys.join("params.bin"), keys.join("pk.bin"), sig.clone()][which].clone();
        let mut bytes = std::fs::read(&target).unwrap();
        if truncate {
            bytes.truncate(pos.index(bytes.len()));
        } else {
            bytes = junk;
        }
        std::fs::write(&target, bytes).unwrap();
        let out = otsske(&["verify", "--keys", p(&keys), "--session", "0", "--in", p(&msg), "--sig", p(&sig)]);
        prop_assert!(matches!(code(&out), 1 | 2), "exit {}", code(&out));
    }
}
