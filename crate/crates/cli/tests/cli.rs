use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wsmq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsmq")).args(args).output().expect("spawn wsmq")
}

fn write_ppm(path: &Path, w: usize, h: usize) {
    let mut data = format!("P6\n{w} {h}\n255\n").into_bytes();
    for y in 0..h {
        for x in 0..w {
            data.extend([(x * 255 / w) as u8, (y * 255 / h) as u8, ((x ^ y) * 7 % 256) as u8]);
        }
    }
    fs::write(path, data).unwrap();
}

fn json_field(json: &str, key: &str) -> String {
    let start = json.find(&format!("\"{key}\": ")).unwrap() + key.len() + 4;
    json[start..].split([',', '\n']).next().unwrap().trim().to_owned()
}

#[test]
fn quantize_writes_image_palette_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.ppm");
    write_ppm(&input, 40, 30);
    let out = dir.path().join("out.png");
    let pal = dir.path().join("pal.txt");
    let o = wsmq(&[
        "quantize",
        "--input",
        input.to_str().unwrap(),
        "--colors",
        "16",
        "--method",
        "wu",
        "--output",
        out.to_str().unwrap(),
        "--palette-out",
        pal.to_str().unwrap(),
        "--report",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json = String::from_utf8(o.stdout).unwrap();
    assert_eq!(json_field(&json, "method"), "\"wu\"");
    let lines = fs::read_to_string(&pal).unwrap().lines().count();
    assert!(lines >= 1 && lines <= 16);
    let img = wsm_core::imageio::load_image(&out).unwrap().image;
    assert_eq!((img.width(), img.height()), (40, 30));
}

#[test]
fn refined_run_is_no_worse_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.ppm");
    write_ppm(&input, 48, 32);
    let out = dir.path().join("out.ppm");
    let run = |method: &str, extra: &[&str]| {
        let mut args = vec![
            "quantize",
            "--input",
            input.to_str().unwrap(),
            "--colors",
            "16",
            "--method",
            method,
            "--seed",
            "7",
            "--output",
            out.to_str().unwrap(),
            "--report",
            "csv",
        ];
        args.extend_from_slice(extra);
        let o = wsmq(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = String::from_utf8(o.stdout).unwrap();
        let row: Vec<String> = text.lines().nth(1).unwrap().split(',').map(str::to_owned).collect();
        row
    };
    let wu = run("wu", &[]);
    let refined = run("wsm-wu", &[]);
    let mse = |r: &[String]| r[6].parse::<f64>().unwrap();
    assert!(mse(&refined) <= mse(&wu) + 1e-9);
    let a = run("wsm", &["--init", "fgy"]);
    let b = run("wsm-fgy", &[]);
    // everything but the wall time
    assert_eq!(a[..10], b[..10]);
    assert_eq!(a[11..], b[11..]);
}

#[test]
fn bad_inputs_fail_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.ppm");
    write_ppm(&input, 4, 4);
    let out = dir.path().join("o.png");
    let base = ["quantize", "--input", input.to_str().unwrap(), "--output", out.to_str().unwrap()];
    let o = wsmq(&[&base[..], &["--colors", "4", "--method", "wsm-nope"]].concat());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("wsm-nope"));
    let o = wsmq(&[&base[..], &["--colors", "1000", "--method", "ott"]].concat());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("1000"));
    let o = wsmq(&["quantize", "--input", "/nonexistent.png", "--colors", "4", "--method", "wu", "--output", "x.png"]);
    assert!(!o.status.success());
}

#[test]
fn bench_writes_rows_and_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let imgs = dir.path().join("imgs");
    fs::create_dir(&imgs).unwrap();
    write_ppm(&imgs.join("a.ppm"), 24, 24);
    write_ppm(&imgs.join("b.ppm"), 30, 20);
    fs::write(imgs.join("notes.txt"), "ignored").unwrap();
    let csv = dir.path().join("out.csv");
    let ranks = dir.path().join("ranks.csv");
    let args = |csv: &Path| {
        vec![
            "bench".to_owned(),
            "--images".into(),
            imgs.to_str().unwrap().into(),
            "--methods".into(),
            "mc,wu,wsm-wu,wsm-kpp".into(),
            "--colors".into(),
            "4,8".into(),
            "--runs".into(),
            "2".into(),
            "--seed".into(),
            "5".into(),
            "--csv".into(),
            csv.to_str().unwrap().into(),
            "--ranks".into(),
            ranks.to_str().unwrap().into(),
            "--no-time".into(),
        ]
    };
    let o = Command::new(env!("CARGO_BIN_EXE_wsmq")).args(args(&csv)).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 4 * 2 * 2);
    assert!(text.starts_with("image,method,k,run,seed,sampling,mse,psnr,"));
    assert!(fs::read_to_string(&ranks).unwrap().lines().count() > 1);
    let again = dir.path().join("again.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_wsmq")).args(args(&again)).output().unwrap();
    assert!(o.status.success());
    assert_eq!(fs::read(&csv).unwrap(), fs::read(&again).unwrap());
}
