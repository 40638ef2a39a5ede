use std::net::SocketAddr;
use std::path::Path;
use std::thread::JoinHandle;

use base64::Engine;
use serde_json::{json, Value};
use tiltwarp::formats::{mesh_to_string, read_flow, read_mesh};
use tiltwarp::geometry::pixel_center;
use tiltwarp::{decode_image, encode_png, mesh_warp, resize_bilinear, Boundary, Image, Mesh64, Pipeline};
use tiltwarp_service::{serve, ServiceConfig};
use ureq::Agent;

struct Server {
    base: String,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl Server {
    fn start(config: ServiceConfig) -> Self {
        let (addr_tx, addr_rx) = std::sync::mpsc::channel::<SocketAddr>();
        let (stop, stop_rx) = tokio::sync::oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(2)
                .enable_all()
                .build()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
                addr_tx.send(listener.local_addr()?).unwrap();
                serve(listener, config, async {
                    let _ = stop_rx.await;
                })
                .await
            })
        });
        let addr = addr_rx.recv().expect("server failed to start");
        Self {
            base: format!("http://{addr}"),
            stop: Some(stop),
            thread: Some(thread),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        if let Some(s) = self.stop.take() {
            let _ = s.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn agent() -> Agent {
    Agent::config_builder().http_status_as_error(false).build().into()
}

fn scene(w: usize, h: usize) -> Image {
    Image::from_fn(w, h, 3, |x, y, c| {
        let (u, v) = (x as f32 / w as f32, y as f32 / h as f32);
        0.5 + 0.35 * ((7.0 * u + c as f32).sin() * (5.0 * v).cos())
    })
    .unwrap()
    .to_u8()
}

fn b64(img: &Image) -> String {
    base64::engine::general_purpose::STANDARD.encode(encode_png(img).unwrap())
}

fn post(a: &Agent, url: &str, body: &Value) -> (u16, Value) {
    let mut r = a.post(url).send_json(body).unwrap();
    (r.status().as_u16(), r.body_mut().read_json().unwrap())
}

fn post_empty(a: &Agent, url: &str) -> (u16, Value) {
    let mut r = a.post(url).send_empty().unwrap();
    (r.status().as_u16(), r.body_mut().read_json().unwrap())
}

fn get_preview(a: &Agent, url: &str) -> (u64, Image) {
    let mut r = a.get(url).call().unwrap();
    assert_eq!(r.status().as_u16(), 200);
    let rev = r.headers()["x-revision"].to_str().unwrap().parse().unwrap();
    let bytes = r.body_mut().with_config().limit(1 << 28).read_to_vec().unwrap();
    (rev, decode_image(&bytes).unwrap())
}

fn create(a: &Agent, s: &Server, img: &Image, mesh: Option<&Mesh64>) -> (u16, Value) {
    let mut body = json!({ "image": b64(img) });
    if let Some(m) = mesh {
        body["mesh"] = json!(mesh_to_string(m));
    }
    post(a, &s.url("/sessions"), &body)
}

fn start() -> (tempfile::TempDir, Server) {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::start(ServiceConfig::new(dir.path().join("data")));
    (dir, server)
}

#[test]
fn health() {
    let (_d, s) = start();
    let mut r = agent().get(&s.url("/health")).call().unwrap();
    assert_eq!(r.status().as_u16(), 200);
    assert_eq!(r.body_mut().read_json::<Value>().unwrap()["status"], "ok");
}

#[test]
fn create_defaults_and_errors() {
    let (_d, s) = start();
    let a = agent();
    let img = scene(160, 120);
    let (st, v) = create(&a, &s, &img, None);
    assert_eq!(st, 201);
    assert_eq!(v["revision"], 0);
    assert_eq!((v["mesh"]["cols"].as_u64(), v["mesh"]["rows"].as_u64()), (Some(8), Some(6)));
    let rig = Mesh64::rigid(160, 120, 8, 6).unwrap();
    let verts: Vec<[f64; 2]> = serde_json::from_value(v["mesh"]["vertices"].clone()).unwrap();
    assert_eq!(verts, rig.vertices().iter().map(|p| [p.x, p.y]).collect::<Vec<_>>());

    let (_, v2) = create(&a, &s, &img, None);
    assert_ne!(v["id"], v2["id"]);

    let wrong = Mesh64::rigid(100, 120, 8, 6).unwrap();
    let (st, e) = create(&a, &s, &img, Some(&wrong));
    assert_eq!(st, 400, "{e}");
    assert!(e["error"].as_str().unwrap().contains("does not match"));

    let (st, _) = post(&a, &s.url("/sessions"), &json!({ "image": "@@@" }));
    assert_eq!(st, 400);
    let junk = base64::engine::general_purpose::STANDARD.encode(b"not an image");
    let (st, _) = post(&a, &s.url("/sessions"), &json!({ "image": junk }));
    assert_eq!(st, 400);
    let (st, _) = post(&a, &s.url("/sessions"), &json!({ "img": "x" }));
    assert_eq!(st, 400);
}

#[test]
fn move_undo_redo_and_errors() {
    let (_d, s) = start();
    let a = agent();
    let (_, v) = create(&a, &s, &scene(160, 120), None);
    let id = v["id"].as_str().unwrap().to_string();
    let mv = |body: Value| post(&a, &s.url(&format!("/sessions/{id}/move")), &body);

    let (st, r) = mv(json!({ "i": 4, "j": 3, "m": 83.0, "n": 60.0, "revision": 0 }));
    assert_eq!(st, 200);
    assert_eq!(r, json!({ "accepted": true, "revision": 1, "rejected_cell": null }));

    let (st, r) = mv(json!({ "i": 4, "j": 3, "m": 120.0, "n": 60.0 }));
    assert_eq!(st, 200);
    assert_eq!(r["accepted"], false);
    assert_eq!(r["revision"], 1);
    assert!(r["rejected_cell"].is_array());

    assert_eq!(mv(json!({ "i": 4, "j": 3, "m": 80.0, "n": 60.0, "revision": 0 })).0, 409);
    assert_eq!(mv(json!({ "i": 9, "j": 3, "m": 80.0, "n": 60.0 })).0, 400);
    assert_eq!(mv(json!({ "i": 1 })).0, 400);
    assert_eq!(post(&a, &s.url("/sessions/nope/move"), &json!({ "i": 1, "j": 1, "m": 1.0, "n": 1.0 })).0, 404);

    let (_, r) = post_empty(&a, &s.url(&format!("/sessions/{id}/undo")));
    assert_eq!(r, json!({ "applied": true, "revision": 2 }));
    let mut m = a.get(&s.url(&format!("/sessions/{id}/mesh"))).call().unwrap();
    let m: Value = m.body_mut().read_json().unwrap();
    assert_eq!(m["revision"], 2);
    assert_eq!(m["mesh"]["vertices"][3 * 9 + 4], json!([80.0, 60.0]));
    let (_, r) = post_empty(&a, &s.url(&format!("/sessions/{id}/undo")));
    assert_eq!(r, json!({ "applied": false, "revision": 2 }));
    let (_, r) = post_empty(&a, &s.url(&format!("/sessions/{id}/redo")));
    assert_eq!(r, json!({ "applied": true, "revision": 3 }));
    assert_eq!(post_empty(&a, &s.url("/sessions/nope/undo")).0, 404);
}

#[test]
fn preview_matches_offline_engine() {
    let (_d, s) = start();
    let a = agent();
    let img = scene(1024, 768);
    let (_, v) = create(&a, &s, &img, None);
    let id = v["id"].as_str().unwrap();
    let (rev, p) = get_preview(&a, &s.url(&format!("/sessions/{id}/preview?max_dim=512")));
    assert_eq!(rev, 0);
    let small = resize_bilinear(&img, 512, 384).unwrap();
    assert_eq!(p.u8_data(), small.to_u8().u8_data());

    let rig = Mesh64::rigid(1024, 768, 8, 6).unwrap();
    let rot = rig.rotated_about(-5.4, pixel_center(1024, 768));
    let (_, v) = create(&a, &s, &img, Some(&rot));
    let id = v["id"].as_str().unwrap();
    let (_, p) = get_preview(&a, &s.url(&format!("/sessions/{id}/preview?max_dim=512")));
    let offline = mesh_warp(&small, &Mesh64::rigid(512, 384, 8, 6).unwrap(), &rot.rescaled(512, 384).unwrap(), Boundary::default()).unwrap();
    assert_eq!(p.u8_data(), offline.to_u8().u8_data());

    let r = a.get(&s.url(&format!("/sessions/{id}/preview?max_dim=0"))).call().unwrap();
    assert_eq!(r.status().as_u16(), 400);
}

fn export(a: &Agent, s: &Server, id: &str) -> Value {
    let (st, v) = post_empty(a, &s.url(&format!("/sessions/{id}/export")));
    assert_eq!(st, 200, "{v}");
    v
}

fn read(p: &Value) -> Vec<u8> {
    std::fs::read(Path::new(p.as_str().unwrap())).unwrap()
}

#[test]
fn export_is_deterministic_and_reproducible() {
    let (_d, s) = start();
    let a = agent();
    let img = scene(640, 480);
    let (_, v) = create(&a, &s, &img, None);
    let id = v["id"].as_str().unwrap();

    let e = export(&a, &s, id);
    let corrected = decode_image(&read(&e["files"]["corrected"])).unwrap();
    assert_eq!(corrected.u8_data(), img.u8_data());

    post(&a, &s.url(&format!("/sessions/{id}/move")), &json!({ "i": 3, "j": 2, "m": 243.0, "n": 158.0 }));
    let e1 = export(&a, &s, id);
    let bytes1: Vec<_> = ["corrected", "mesh", "flow"].iter().map(|k| read(&e1["files"][k])).collect();
    let e2 = export(&a, &s, id);
    let bytes2: Vec<_> = ["corrected", "mesh", "flow"].iter().map(|k| read(&e2["files"][k])).collect();
    assert_eq!(bytes1, bytes2);
    assert_eq!(e1["revision"], 1);

    let flow = read_flow(e1["files"]["flow"].as_str().unwrap()).unwrap();
    let pipeline = Pipeline::new(512, 384, Boundary::default()).unwrap();
    let offline = pipeline.apply_flow(&img, &flow).unwrap();
    assert_eq!(encode_png(&offline).unwrap(), bytes1[0]);
    let mesh = read_mesh(e1["files"]["mesh"].as_str().unwrap()).unwrap();
    assert_eq!(mesh.vertex(3, 2), tiltwarp::Point2::new(243.0, 158.0));
    assert_eq!(post_empty(&a, &s.url("/sessions/nope/export")).0, 404);
}

#[test]
fn full_size_preview_equals_export_at_working_resolution() {
    let (_d, s) = start();
    let a = agent();
    let img = scene(512, 384);
    let rot = Mesh64::rigid(512, 384, 8, 6).unwrap().rotated_about(7.3, pixel_center(512, 384));
    let (_, v) = create(&a, &s, &img, Some(&rot));
    let id = v["id"].as_str().unwrap();
    let (_, p) = get_preview(&a, &s.url(&format!("/sessions/{id}/preview?max_dim=512")));
    let e = export(&a, &s, id);
    assert_eq!(encode_png(&p).unwrap(), read(&e["files"]["corrected"]));
}

#[test]
fn sessions_are_isolated() {
    let (_d, s) = start();
    let a = agent();
    let (_, v1) = create(&a, &s, &scene(160, 120), None);
    let (_, v2) = create(&a, &s, &scene(160, 120), None);
    let (id1, id2) = (v1["id"].as_str().unwrap(), v2["id"].as_str().unwrap());
    post(&a, &s.url(&format!("/sessions/{id1}/move")), &json!({ "i": 2, "j": 2, "m": 41.0, "n": 39.0 }));
    let mut r = a.get(&s.url(&format!("/sessions/{id2}/mesh"))).call().unwrap();
    let m: Value = r.body_mut().read_json().unwrap();
    assert_eq!(m["revision"], 0);
    assert_eq!(m["mesh"], v2["mesh"]);
}

#[test]
fn bad_data_dir_fails_startup() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    std::fs::write(&file, b"x").unwrap();
    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
    let res = rt.block_on(async {
        let l = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        serve(l, ServiceConfig::new(&file), async {}).await
    });
    assert!(res.is_err());
}
