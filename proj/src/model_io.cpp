#include "forestkernel/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace fk {

namespace {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const void* data, std::size_t len) {
    buf_.insert(buf_.end(), static_cast<const char*>(data),
                static_cast<const char*>(data) + len);
  }
  const std::vector<char>& bytes() const { return buf_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::vector<char> buf_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<char>& buf, std::size_t offset)
      : buf_(buf), pos_(offset) {}

  void set_section(const char* name) { section_ = name; }

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t pos() const { return pos_; }
  bool exhausted() const { return pos_ >= buf_.size(); }

 private:
  const char* take(std::size_t len) {
    if (pos_ + len > buf_.size())
      throw std::runtime_error(std::string("model archive corrupt: truncated section ") +
                               section_);
    const char* p = buf_.data() + pos_;
    pos_ += len;
    return p;
  }
  std::uint64_t le(int n) {
    const char* p = take(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i)
      v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(p[i])) << (8 * i);
    return v;
  }
  const std::vector<char>& buf_;
  std::size_t pos_;
  const char* section_ = "header";
};

void write_node(ByteWriter& w, const TreeNode& node) {
  w.i32(node.feature);
  w.f64(node.threshold);
  w.i32(node.left);
  w.i32(node.right);
  w.i32(node.parent);
  w.i32(node.leaf_id);
  w.f64(node.leaf_mean);
  w.u32(node.sample_count);
  w.u16(node.depth);
}

TreeNode read_node(ByteReader& r) {
  TreeNode node;
  node.feature = r.i32();
  node.threshold = r.f64();
  node.left = r.i32();
  node.right = r.i32();
  node.parent = r.i32();
  node.leaf_id = r.i32();
  node.leaf_mean = r.f64();
  node.sample_count = r.u32();
  node.depth = r.u16();
  return node;
}

}  // namespace

void save_model(const FittedModel& model, const std::string& path) {
  model.validate();
  ByteWriter w;
  w.raw(kModelMagic, sizeof(kModelMagic));
  w.u32(kModelSchemaVersion);

  // PARM
  w.raw("PARM", 4);
  w.u64(model.train_count());
  w.u64(model.feature_count());
  w.u32(static_cast<std::uint32_t>(model.forest.trees.size()));
  w.i32(model.forest.params.max_depth);
  w.i32(model.forest.params.mtry);
  w.i32(model.forest.params.min_node_size);
  w.u8(model.forest.params.bootstrap ? 1 : 0);
  w.u64(model.forest.seed);
  w.f64(model.default_bandwidth);

  // TREE
  w.raw("TREE", 4);
  for (const Tree& tree : model.forest.trees) {
    w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
    w.u32(static_cast<std::uint32_t>(tree.leaf_count));
    for (const TreeNode& node : tree.nodes) write_node(w, node);
  }

  // LEAF
  w.raw("LEAF", 4);
  for (std::uint32_t v : model.leaf_matrix.entries) w.u32(v);

  // RESP
  w.raw("RESP", 4);
  for (double y : model.responses) w.f64(y);

  // ORDR
  w.raw("ORDR", 4);
  for (std::uint32_t v : model.response_order) w.u32(v);

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_model: cannot open " + path);
  f.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!f) throw std::runtime_error("save_model: write failed for " + path);
}

namespace {

void expect_tag(ByteReader& r, const char* tag) {
  r.set_section(tag);
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>(r.u8());
  if (std::memcmp(buf, tag, 4) != 0)
    throw std::runtime_error(std::string("model archive corrupt: expected section ") + tag);
}

}  // namespace

FittedModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_model: cannot open " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(f)),
                        std::istreambuf_iterator<char>());

  if (buf.size() < sizeof(kModelMagic) + 4 ||
      std::memcmp(buf.data(), kModelMagic, sizeof(kModelMagic)) != 0)
    throw std::runtime_error("load_model: not a model archive (bad magic)");

  ByteReader r(buf, sizeof(kModelMagic));
  const std::uint32_t version = r.u32();
  if (version != kModelSchemaVersion)
    throw std::runtime_error("load_model: unsupported schema version " +
                             std::to_string(version) + " (expected " +
                             std::to_string(kModelSchemaVersion) + ")");

  FittedModel model;

  expect_tag(r, "PARM");
  const std::uint64_t n = r.u64();
  const std::uint64_t p = r.u64();
  const std::uint32_t tree_count = r.u32();
  model.forest.params.tree_count = static_cast<int>(tree_count);
  model.forest.params.max_depth = r.i32();
  model.forest.params.mtry = r.i32();
  model.forest.params.min_node_size = r.i32();
  model.forest.params.bootstrap = r.u8() != 0;
  model.forest.seed = r.u64();
  model.default_bandwidth = r.f64();
  model.forest.feature_count = p;

  expect_tag(r, "TREE");
  model.forest.trees.resize(tree_count);
  for (Tree& tree : model.forest.trees) {
    const std::uint32_t node_count = r.u32();
    tree.leaf_count = static_cast<std::int32_t>(r.u32());
    tree.nodes.reserve(node_count);
    for (std::uint32_t i = 0; i < node_count; ++i) tree.nodes.push_back(read_node(r));
  }

  expect_tag(r, "LEAF");
  model.leaf_matrix.n_rows = n;
  model.leaf_matrix.n_trees = tree_count;
  model.leaf_matrix.entries.resize(n * tree_count);
  for (auto& v : model.leaf_matrix.entries) v = r.u32();

  expect_tag(r, "RESP");
  model.responses.resize(n);
  for (auto& y : model.responses) y = r.f64();

  expect_tag(r, "ORDR");
  model.response_order.resize(n);
  for (auto& v : model.response_order) v = r.u32();

  if (!r.exhausted())
    throw std::runtime_error("load_model: trailing bytes after final section");

  model.validate();
  if (!model.forest.params.unlimited_depth())
    model.paths = build_leaf_paths(model.forest);
  return model;
}

}  // namespace fk
