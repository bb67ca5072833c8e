#include "faultlab/assembler.hpp"

#include "faultlab/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <variant>

namespace faultlab {

std::optional<Address> ProgramImage::symbol(std::string_view name) const {
  auto it = symbols.find(name);
  if (it == symbols.end()) return std::nullopt;
  return it->second;
}

Address ProgramImage::require_symbol(std::string_view name) const {
  auto addr = symbol(name);
  if (!addr)
    throw Error(ErrorCode::MissingSymbol, "symbol '" + std::string(name) + "' not defined");
  return *addr;
}

Address ProgramImage::footprint_end() const {
  Address end = 0;
  for (const auto& r : footprint) end = std::max(end, r.end());
  return end;
}

namespace {

enum class Section { Text, Data };

// A value that may still name a label; resolved in pass two.
using Operand = std::variant<std::int64_t, std::string>;

struct PendingInstr {
  int line;
  Address addr;
  OpcodeInfo info;
  std::vector<std::string> args;
};

struct PendingWord {
  int line;
  Section section;
  std::size_t index;  // word index in code, or byte offset in data
  Operand value;
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_label_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

bool is_label_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_label_start(s.front())) return false;
  return std::all_of(s.begin(), s.end(), is_label_char);
}

std::vector<std::string> split_operands(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  auto last = trim(cur);
  if (!last.empty() || !out.empty()) out.emplace_back(last);
  return out;
}

std::optional<std::int64_t> parse_number(std::string_view s) {
  s = trim(s);
  bool neg = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || p != s.data() + s.size() || v > 0xFFFF'FFFFull) return std::nullopt;
  auto sv = static_cast<std::int64_t>(v);
  return neg ? -sv : sv;
}

class Assembler {
 public:
  explicit Assembler(std::string_view source) : source_(source) {}

  ProgramImage run() {
    pass_one();
    pass_two();
    finalize();
    return std::move(image_);
  }

 private:
  [[noreturn]] void fail(ErrorCode code, const std::string& msg) const {
    throw AssemblyError(code, line_, msg);
  }

  Address here() const {
    return section_ == Section::Text
               ? image_.code_base + static_cast<Address>(code_words_ * 4)
               : image_.data_base + static_cast<Address>(image_.data.size());
  }

  void define_label(std::string_view name) {
    if (!is_identifier(name)) fail(ErrorCode::SyntaxError, "bad label '" + std::string(name) + "'");
    auto [it, inserted] = image_.symbols.emplace(std::string(name), here());
    if (!inserted) fail(ErrorCode::DuplicateLabel, "label '" + std::string(name) + "' redefined");
  }

  Operand value_operand(std::string_view text) {
    if (auto n = parse_number(text)) return *n;
    if (is_identifier(trim(text))) return std::string(trim(text));
    fail(ErrorCode::SyntaxError, "expected number or label, got '" + std::string(text) + "'");
  }

  void directive(const std::string& name, std::string_view rest) {
    if (name == ".TEXT") {
      section_ = Section::Text;
    } else if (name == ".DATA") {
      if (!trim(rest).empty()) {
        if (data_started_) fail(ErrorCode::SyntaxError, ".data address given after data emitted");
        auto addr = parse_number(rest);
        if (!addr || *addr < 0 || (*addr & 3))
          fail(ErrorCode::SyntaxError, ".data address must be a non-negative aligned number");
        image_.data_base = static_cast<Address>(*addr);
      }
      section_ = Section::Data;
    } else if (name == ".WORD") {
      auto ops = split_operands(rest);
      if (ops.empty()) fail(ErrorCode::SyntaxError, ".word needs at least one value");
      for (const auto& op : ops) {
        auto v = value_operand(op);
        if (section_ == Section::Text) {
          words_.push_back({line_, Section::Text, code_words_, v});
          ++code_words_;
        } else {
          data_started_ = true;
          words_.push_back({line_, Section::Data, image_.data.size(), v});
          image_.data.resize(image_.data.size() + 4, 0);
        }
      }
    } else if (name == ".SPACE") {
      auto n = parse_number(rest);
      if (!n || *n < 0 || (*n & 3)) fail(ErrorCode::SyntaxError, ".space needs a non-negative multiple of 4");
      if (section_ == Section::Text) fail(ErrorCode::SyntaxError, ".space is only valid in .data");
      data_started_ = true;
      image_.data.resize(image_.data.size() + static_cast<std::size_t>(*n), 0);
    } else {
      fail(ErrorCode::UnknownMnemonic, "unknown directive '" + name + "'");
    }
  }

  void pass_one() {
    std::size_t pos = 0;
    while (pos <= source_.size()) {
      auto nl = source_.find('\n', pos);
      auto raw = source_.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? source_.size() + 1 : nl + 1;
      ++line_;

      auto text = raw.substr(0, raw.find(';'));
      text = trim(text);
      // Leading labels, possibly several ("a: b: NOP").
      while (true) {
        auto colon = text.find(':');
        if (colon == std::string_view::npos) break;
        auto head = trim(text.substr(0, colon));
        if (!is_identifier(head)) break;
        define_label(head);
        text = trim(text.substr(colon + 1));
      }
      if (text.empty()) continue;

      auto space = text.find_first_of(" \t");
      auto word = upper(text.substr(0, space));
      auto rest = space == std::string_view::npos ? std::string_view{} : trim(text.substr(space));

      if (!word.empty() && word.front() == '.') {
        directive(word, rest);
        continue;
      }
      auto info = opcode_by_mnemonic(word);
      if (!info) fail(ErrorCode::UnknownMnemonic, "unknown mnemonic '" + std::string(text.substr(0, space)) + "'");
      if (section_ != Section::Text) fail(ErrorCode::SyntaxError, "instruction outside .text");
      instrs_.push_back({line_, here(), *info, split_operands(rest)});
      words_.push_back({line_, Section::Text, code_words_, std::int64_t{0}});
      ++code_words_;
    }
  }

  std::int64_t resolve(const Operand& op) {
    if (auto n = std::get_if<std::int64_t>(&op)) return *n;
    const auto& name = std::get<std::string>(op);
    auto it = image_.symbols.find(name);
    if (it == image_.symbols.end()) fail(ErrorCode::UndefinedLabel, "undefined label '" + name + "'");
    return it->second;
  }

  unsigned reg(std::string_view text) {
    auto u = upper(trim(text));
    if (u == "SP") return kStackPointer;
    if (u == "LR") return kLinkRegister;
    if (u.size() >= 2 && u[0] == 'R') {
      unsigned v = 0;
      auto [p, ec] = std::from_chars(u.data() + 1, u.data() + u.size(), v);
      if (ec == std::errc() && p == u.data() + u.size() && v < kNumRegisters) return v;
    }
    fail(ErrorCode::SyntaxError, "expected register, got '" + std::string(text) + "'");
  }

  std::int64_t imm(std::string_view text, std::int64_t lo, std::int64_t hi) {
    auto v = resolve(value_operand(text));
    if (v < lo || v > hi)
      fail(ErrorCode::ImmediateOutOfRange,
           "immediate " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
               std::to_string(hi) + "]");
    return v;
  }

  // "[Rn+imm]", "[Rn-imm]" or "[Rn]"
  std::pair<unsigned, std::int64_t> mem_operand(std::string_view text) {
    text = trim(text);
    if (text.size() < 3 || text.front() != '[' || text.back() != ']')
      fail(ErrorCode::SyntaxError, "expected [reg+offset], got '" + std::string(text) + "'");
    auto inner = trim(text.substr(1, text.size() - 2));
    auto sign = inner.find_first_of("+-");
    if (sign == std::string_view::npos) return {reg(inner), 0};
    auto base = reg(inner.substr(0, sign));
    auto off = imm(inner.substr(inner[sign] == '+' ? sign + 1 : sign), -2048, 2047);
    return {base, off};
  }

  void expect_args(const PendingInstr& in, std::size_t n) {
    if (in.args.size() != n)
      fail(ErrorCode::SyntaxError, std::string(in.info.mnemonic) + " expects " + std::to_string(n) +
                                       " operand(s), got " + std::to_string(in.args.size()));
  }

  Word encode_instr(const PendingInstr& in) {
    const auto op = in.info.opcode;
    const auto& a = in.args;
    switch (in.info.format) {
      case Format::None:
        expect_args(in, 0);
        return encode(op);
      case Format::Rd:
        expect_args(in, 1);
        return encode(op, reg(a[0]));
      case Format::Rs1:
        expect_args(in, 1);
        return encode(op, 0, reg(a[0]));
      case Format::RdImm16: {
        expect_args(in, 2);
        auto rd = reg(a[0]);
        return encode16(op, rd, 0, static_cast<std::uint32_t>(imm(a[1], 0, 0xFFFF)));
      }
      case Format::RdRs1:
        expect_args(in, 2);
        return encode(op, reg(a[0]), reg(a[1]));
      case Format::RdRs1Rs2:
        expect_args(in, 3);
        return encode(op, reg(a[0]), reg(a[1]), reg(a[2]));
      case Format::RdRs1Imm: {
        expect_args(in, 3);
        auto rd = reg(a[0]);
        auto rs1 = reg(a[1]);
        auto v = op == Opcode::Addi ? imm(a[2], -2048, 2047) : imm(a[2], 0, 31);
        return encode(op, rd, rs1, 0, static_cast<std::uint32_t>(v));
      }
      case Format::Rs1Rs2:
        expect_args(in, 2);
        return encode(op, 0, reg(a[0]), reg(a[1]));
      case Format::Load: {
        expect_args(in, 2);
        auto rd = reg(a[0]);
        auto [base, off] = mem_operand(a[1]);
        return encode(op, rd, base, 0, static_cast<std::uint32_t>(off));
      }
      case Format::Store: {
        expect_args(in, 2);
        auto rs2 = reg(a[0]);
        auto [base, off] = mem_operand(a[1]);
        return encode(op, 0, base, rs2, static_cast<std::uint32_t>(off));
      }
      case Format::Branch: {
        expect_args(in, 1);
        auto target = resolve(value_operand(a[0]));
        auto delta = target - (static_cast<std::int64_t>(in.addr) + 4);
        if (delta % 4 != 0) fail(ErrorCode::SyntaxError, "branch target not word aligned");
        auto words = delta / 4;
        if (words < -32768 || words > 32767)
          fail(ErrorCode::ImmediateOutOfRange, "branch offset out of range");
        return encode16(op, 0, 0, static_cast<std::uint32_t>(words));
      }
    }
    fail(ErrorCode::SyntaxError, "unhandled format");
  }

  void pass_two() {
    image_.code.assign(code_words_, 0);
    std::size_t next_instr = 0;
    for (const auto& w : words_) {
      line_ = w.line;
      if (w.section == Section::Text) {
        // Instruction slots were queued with a placeholder; match them by address.
        if (next_instr < instrs_.size() &&
            instrs_[next_instr].addr == image_.code_base + static_cast<Address>(w.index * 4)) {
          image_.code[w.index] = encode_instr(instrs_[next_instr]);
          ++next_instr;
        } else {
          auto v = resolve(w.value);
          if (v < -0x8000'0000ll || v > 0xFFFF'FFFFll) fail(ErrorCode::ImmediateOutOfRange, ".word value out of range");
          image_.code[w.index] = static_cast<Word>(v);
        }
      } else {
        auto v = resolve(w.value);
        if (v < -0x8000'0000ll || v > 0xFFFF'FFFFll) fail(ErrorCode::ImmediateOutOfRange, ".word value out of range");
        auto u = static_cast<Word>(v);
        for (int b = 0; b < 4; ++b) image_.data[w.index + b] = static_cast<std::uint8_t>(u >> (8 * b));
      }
    }
  }

  void finalize() {
    image_.entry = image_.symbol("_start").value_or(image_.code_base);
    auto code = image_.code_range();
    if (!image_.data.empty() && code.end() > image_.data_base && image_.data_base + image_.data.size() > code.start)
      throw Error(ErrorCode::ImageTooLarge, "code section overlaps .data at " + std::to_string(image_.data_base));
    if (code.length > 0) image_.footprint.push_back(code);
    if (!image_.data.empty())
      image_.footprint.push_back({image_.data_base, static_cast<std::uint32_t>(image_.data.size())});
  }

  std::string_view source_;
  ProgramImage image_;
  Section section_ = Section::Text;
  bool data_started_ = false;
  int line_ = 0;
  std::size_t code_words_ = 0;
  std::vector<PendingInstr> instrs_;
  std::vector<PendingWord> words_;
};

}  // namespace

ProgramImage assemble(std::string_view source) { return Assembler(source).run(); }

}  // namespace faultlab
