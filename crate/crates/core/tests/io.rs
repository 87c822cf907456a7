use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs::File;
use stitchkit_core::harness::overhead_camera;
use stitchkit_core::io::*;
use stitchkit_core::synth_scene::*;

fn cloud() -> Vec<stitchkit_core::geom3d::Point3<f64>> {
    let gt = random_needle_pose(
        &mut ChaCha8Rng::seed_from_u64(3),
        &overhead_camera(),
        &PoseSampler::default(),
    );
    sample_needle_cloud(&gt, &NoiseModel::default().with_seed(3), 150).unwrap()
}

#[test]
fn clouds_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let pts = cloud();
    for name in ["needle.csv", "needle.ply", "needle.txt"] {
        let path = dir.path().join(name);
        save_cloud(&path, &pts).unwrap();
        assert_eq!(load_cloud(&path).unwrap(), pts, "{name}");
    }
}

#[test]
fn renders_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let gt = random_needle_pose(
        &mut ChaCha8Rng::seed_from_u64(9),
        &overhead_camera(),
        &PoseSampler::default(),
    );
    let (mask, depth) = render_views(&gt, &overhead_camera(), &RenderConfig::default()).unwrap();
    let mask_path = dir.path().join("mask.pgm");
    write_mask_pgm(File::create(&mask_path).unwrap(), &mask).unwrap();
    assert_eq!(read_mask_pgm(File::open(&mask_path).unwrap()).unwrap(), mask);
    let depth_path = dir.path().join("depth.csv");
    write_depth_csv(File::create(&depth_path).unwrap(), &depth).unwrap();
    let back = read_depth_csv(File::open(&depth_path).unwrap()).unwrap();
    assert_eq!(back.values(), depth.values());
}

#[test]
fn missing_and_malformed_files_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(load_cloud(&dir.path().join("absent.csv")).is_err());
    let bad = dir.path().join("bad.ply");
    std::fs::write(&bad, "not a ply\n").unwrap();
    assert!(matches!(load_cloud(&bad), Err(IoError::Format(_))));
}
