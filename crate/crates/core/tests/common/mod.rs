//! Synthetic Vietnamese sentences from a small template grammar. Verbs
//! only take objects that fit them, so context predicts the next word.

#![allow(dead_code)]

pub mod oracle;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TIMES: &[&str] = &[
    "hôm nay",
    "hôm qua",
    "ngày mai",
    "sáng nay",
    "tối qua",
    "tuần sau",
    "năm ngoái",
    "mỗi ngày",
    "chiều nay",
    "cuối tuần",
];

const SUBJECTS: &[&str] = &[
    "tôi",
    "chúng tôi",
    "anh ấy",
    "cô ấy",
    "bạn tôi",
    "mẹ tôi",
    "bố tôi",
    "các em học sinh",
    "người dân",
    "công ty",
    "thầy giáo",
    "bác sĩ",
    "đội bóng",
    "gia đình tôi",
    "ông bà",
    "chị gái",
    "em trai",
    "khách hàng",
    "nhân viên",
    "sinh viên",
];

const ADVERBS: &[&str] = &["đã", "đang", "sẽ", "vừa", "thường", "không", "chưa", "cũng"];

const VERBS: &[(&str, &[&str])] = &[
    (
        "ăn",
        &["cơm", "phở", "bánh mì", "trái cây", "bữa sáng", "canh chua"],
    ),
    ("uống", &["nước", "cà phê", "trà đá", "sữa", "nước cam"]),
    ("đọc", &["sách", "báo", "tin tức", "truyện ngắn", "tạp chí"]),
    (
        "mua",
        &["nhà mới", "xe máy", "quần áo", "điện thoại", "rau quả"],
    ),
    (
        "xây dựng",
        &["cầu đường", "trường học", "bệnh viện", "nhà máy"],
    ),
    (
        "học",
        &["tiếng anh", "toán", "lịch sử", "văn học", "địa lý"],
    ),
    ("ký kết", &["hợp đồng", "thỏa thuận", "hiệp định"]),
    (
        "chuẩn bị",
        &["bữa tối", "hành lý", "kế hoạch", "tài liệu", "sẵn sàng"],
    ),
    ("sửa chữa", &["xe đạp", "mái nhà", "máy tính", "đường ống"]),
    ("viết", &["thư", "bài báo", "báo cáo", "nhật ký"]),
    ("xem", &["phim", "bóng đá", "ti vi", "ca nhạc"]),
    ("trồng", &["cây xanh", "lúa", "rau sạch", "hoa hồng"]),
    ("gặp", &["bạn bè", "giám đốc", "người thân", "đối tác"]),
    ("giúp đỡ", &["người nghèo", "hàng xóm", "bạn học"]),
];

const PLACES: &[&str] = &[
    "ở hà nội",
    "tại sài gòn",
    "ở nhà",
    "trong thành phố",
    "ở trường",
    "ngoài chợ",
    "tại công ty",
    "ở quê",
    "bên bờ sông",
    "trên núi",
];

const ENDINGS: &[&str] = &[
    "rất vui vẻ",
    "cùng nhau",
    "một cách nhanh chóng",
    "vào buổi sáng",
    "như mọi khi",
];

pub fn sentence(rng: &mut ChaCha8Rng) -> String {
    let mut words: Vec<&str> = Vec::new();
    if rng.gen_bool(0.5) {
        words.push(TIMES.choose(rng).unwrap());
    }
    words.push(SUBJECTS.choose(rng).unwrap());
    if rng.gen_bool(0.6) {
        words.push(ADVERBS.choose(rng).unwrap());
    }
    let (verb, objects) = VERBS.choose(rng).unwrap();
    words.push(verb);
    words.push(objects.choose(rng).unwrap());
    if rng.gen_bool(0.5) {
        words.push(PLACES.choose(rng).unwrap());
    }
    if rng.gen_bool(0.3) {
        words.push(ENDINGS.choose(rng).unwrap());
    }
    words.join(" ")
}

pub fn corpus(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sentence(&mut rng)).collect()
}

/// Raw-looking variants: capitals, punctuation, an emoji, old-style tone
/// placement. Preprocessing should map them back to the plain sentence.
pub fn noisy(s: &str, rng: &mut ChaCha8Rng) -> String {
    let mut out = String::new();
    for (i, w) in s.split(' ').enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let w = w
            .replace("òa", "oà")
            .replace("ỏa", "oả")
            .replace("ủy", "uỷ");
        if rng.gen_bool(0.2) {
            let mut cs = w.chars();
            let first = cs.next().unwrap().to_uppercase().collect::<String>();
            out.push_str(&first);
            out.push_str(cs.as_str());
        } else {
            out.push_str(&w);
        }
    }
    if rng.gen_bool(0.3) {
        out.push_str(" 😀");
    }
    if rng.gen_bool(0.5) {
        out.push('.');
    }
    out
}
