// Seeded toy corpus: a handful of API "families", each a small class shape
// with three methods. Context words are noised; code is not, so every
// family member carries the same three sketches.

#include <cmath>
#include <string>
#include <vector>

#include "codec/error.h"
#include "codec/eval.h"
#include "codec/rng.h"

namespace codec {
namespace {

struct ParamSpec {
  const char* type;
  std::vector<const char*> name;  // camel-case words
};

struct MethodSpec {
  std::vector<const char*> doc;
  const char* ret;
  std::vector<const char*> name;
  std::vector<ParamSpec> params;
  // $0, $1 stand for the (possibly noised) parameter names.
  const char* body;
};

struct FamilySpec {
  std::vector<const char*> class_name;
  std::vector<ParamSpec> fields;
  std::vector<MethodSpec> methods;
};

// Every template has one formal and three calls carrying one argument in
// total, so all sketches linearize to the same number of tokens and differ
// only in vocabulary.
const std::vector<FamilySpec>& families() {
  static const std::vector<FamilySpec> kFamilies = {
      {{"file", "text", "loader"},
       {{"File", {"base", "dir"}}, {"String", {"encoding"}}},
       {{{"reads", "the", "first", "byte", "of", "a", "file"},
         "int", {"read", "first", "byte"}, {{"File", {"file"}}},
         "FileReader r = new FileReader($0);\n"
         "int b = r.read();\n"
         "r.close();\n"
         "return b;\n"},
        {{"writes", "an", "empty", "text", "file"},
         "void", {"write", "text"}, {{"String", {"path"}}},
         "FileWriter w = new FileWriter($0);\n"
         "w.flush();\n"
         "w.close();\n"},
        {{"deletes", "the", "file", "at", "a", "path"},
         "boolean", {"remove", "file"}, {{"String", {"path"}}},
         "File f = new File($0);\n"
         "boolean ok = f.delete();\n"
         "f.deleteOnExit();\n"
         "return ok;\n"}}},
      {{"http", "client", "fetcher"},
       {{"URL", {"endpoint"}}, {"Proxy", {"proxy"}}},
       {{{"opens", "a", "connection", "and", "returns", "the", "stream"},
         "InputStream", {"open", "stream"}, {{"URL", {"url"}}},
         "URLConnection c = $0.openConnection();\n"
         "c.setConnectTimeout(5000);\n"
         "return c.getInputStream();\n"},
        {{"sends", "a", "packet", "over", "the", "socket"},
         "void", {"send", "packet"}, {{"Socket", {"socket"}}},
         "OutputStream out = $0.getOutputStream();\n"
         "out.write(42);\n"
         "out.flush();\n"},
        {{"closes", "the", "socket", "quietly"},
         "void", {"close", "socket"}, {{"Socket", {"socket"}}},
         "$0.setSoTimeout(0);\n"
         "$0.shutdownOutput();\n"
         "$0.close();\n"}}},
      {{"main", "window", "frame"},
       {{"JPanel", {"content", "panel"}}, {"String", {"title"}}},
       {{{"creates", "and", "shows", "a", "new", "frame"},
         "JFrame", {"create", "frame"}, {{"String", {"title"}}},
         "JFrame frame = new JFrame($0);\n"
         "frame.pack();\n"
         "frame.toFront();\n"
         "return frame;\n"},
        {{"adds", "a", "button", "to", "the", "panel"},
         "void", {"add", "button"}, {{"JPanel", {"panel"}}},
         "JButton button = new JButton();\n"
         "$0.add(button);\n"
         "$0.revalidate();\n"},
        {{"shows", "a", "message", "label"},
         "void", {"show", "message"}, {{"String", {"message"}}},
         "JLabel label = new JLabel($0);\n"
         "label.repaint();\n"
         "label.requestFocus();\n"}}},
      {{"item", "list", "registry"},
       {{"ArrayList", {"items"}}, {"HashMap", {"lookup"}}},
       {{{"builds", "an", "empty", "list", "with", "capacity"},
         "List", {"build", "list"}, {{"int", {"size"}}},
         "ArrayList list = new ArrayList($0);\n"
         "list.clear();\n"
         "list.trimToSize();\n"
         "return list;\n"},
        {{"checks", "whether", "the", "map", "has", "a", "key"},
         "boolean", {"has", "key"}, {{"String", {"key"}}},
         "HashMap map = new HashMap();\n"
         "boolean has = map.containsKey($0);\n"
         "map.clear();\n"
         "return has;\n"},
        {{"sorts", "the", "items", "and", "walks", "them"},
         "void", {"sort", "items"}, {{"List", {"items"}}},
         "Collections.sort($0);\n"
         "Iterator it = $0.iterator();\n"
         "it.hasNext();\n"}}},
      {{"secure", "hash", "digest"},
       {{"MessageDigest", {"digest"}}, {"Key", {"secret", "key"}}},
       {{{"creates", "a", "message", "digest"},
         "MessageDigest", {"new", "digest"}, {{"String", {"algorithm"}}},
         "MessageDigest md = MessageDigest.getInstance($0);\n"
         "md.reset();\n"
         "md.digest();\n"
         "return md;\n"},
        {{"initializes", "a", "cipher", "by", "name"},
         "Cipher", {"init", "cipher"}, {{"String", {"transformation"}}},
         "Cipher c = Cipher.getInstance($0);\n"
         "c.getBlockSize();\n"
         "c.getIV();\n"
         "return c;\n"},
        {{"creates", "a", "seeded", "secure", "random"},
         "SecureRandom", {"new", "random"}, {{"long", {"seed"}}},
         "SecureRandom r = new SecureRandom();\n"
         "r.setSeed($0);\n"
         "r.nextInt();\n"
         "return r;\n"}}},
      {{"user", "record", "store"},
       {{"Connection", {"connection"}}, {"String", {"table"}}},
       {{{"runs", "a", "query", "against", "the", "database"},
         "ResultSet", {"run", "query"}, {{"String", {"sql"}}},
         "Statement st = connection.createStatement();\n"
         "ResultSet rs = st.executeQuery($0);\n"
         "rs.next();\n"
         "return rs;\n"},
        {{"commits", "the", "pending", "work"},
         "void", {"commit", "work"}, {{"Connection", {"conn"}}},
         "$0.setAutoCommit(false);\n"
         "$0.commit();\n"
         "$0.close();\n"},
        {{"counts", "the", "rows", "of", "a", "result"},
         "int", {"count", "rows"}, {{"ResultSet", {"rows"}}},
         "$0.absolute(0);\n"
         "int n = $0.getRow();\n"
         "$0.close();\n"
         "return n;\n"}}},
      {{"config", "xml", "parser"},
       {{"DocumentBuilderFactory", {"factory"}}, {"Document", {"document"}}},
       {{{"parses", "an", "xml", "document", "from", "a", "file"},
         "Document", {"parse", "xml"}, {{"File", {"source"}}},
         "DocumentBuilder b = factory.newDocumentBuilder();\n"
         "Document doc = b.parse($0);\n"
         "doc.normalize();\n"
         "return doc;\n"},
        {{"reads", "the", "id", "attribute", "of", "an", "element"},
         "String", {"read", "attribute"}, {{"Element", {"element"}}},
         "String v = $0.getAttribute(\"id\");\n"
         "$0.normalize();\n"
         "$0.getTagName();\n"
         "return v;\n"},
        {{"finds", "nodes", "with", "the", "given", "tag"},
         "NodeList", {"find", "nodes"}, {{"String", {"tag"}}},
         "NodeList nodes = document.getElementsByTagName($0);\n"
         "nodes.getLength();\n"
         "document.normalizeDocument();\n"
         "return nodes;\n"}}},
      {{"task", "worker", "pool"},
       {{"ExecutorService", {"executor"}}, {"Runnable", {"job"}}},
       {{{"starts", "a", "worker", "thread", "and", "waits"},
         "void", {"start", "worker"}, {{"Runnable", {"job"}}},
         "Thread t = new Thread($0);\n"
         "t.start();\n"
         "t.join();\n"},
        {{"makes", "a", "fixed", "size", "pool"},
         "ExecutorService", {"make", "pool"}, {{"int", {"size"}}},
         "ExecutorService ex = Executors.newFixedThreadPool($0);\n"
         "ex.shutdown();\n"
         "ex.isShutdown();\n"
         "return ex;\n"},
        {{"sleeps", "for", "a", "while"},
         "void", {"pause"}, {{"long", {"millis"}}},
         "Thread.sleep($0);\n"
         "Thread.yield();\n"
         "Thread.currentThread();\n"}}},
  };
  return kFamilies;
}

constexpr std::array<const char*, 16> kFiller = {
    "alpha", "beta", "gamma", "delta", "util", "helper", "manager", "data",
    "value", "thing", "misc", "handler", "common", "simple", "core", "extra"};

class Noiser {
 public:
  Noiser(double noise, std::uint64_t seed) : noise_(noise), rng_(seed) {}

  std::string word(const char* w) {
    // Always draw, so the stream layout does not depend on noise.
    const double u = rng_.uniform();
    const auto pick = rng_.below(kFiller.size());
    return u < noise_ ? kFiller[pick] : w;
  }

  std::string camel(const std::vector<const char*>& words, bool capitalize_first) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
      std::string w = word(words[i]);
      if (i > 0 || capitalize_first) w[0] = static_cast<char>(std::toupper(w[0]));
      out += w;
    }
    return out;
  }

  std::string sentence(const std::vector<const char*>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i > 0) out += ' ';
      out += word(words[i]);
    }
    return out + ".";
  }

 private:
  double noise_;
  Rng rng_;
};

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

std::string indent_body(const std::string& body, const std::string& pad) {
  std::string out;
  std::size_t start = 0;
  while (start < body.size()) {
    const std::size_t end = body.find('\n', start);
    out += pad + body.substr(start, end - start) + "\n";
    start = end + 1;
  }
  return out;
}

}  // namespace

std::string synthetic_class_source(std::size_t family, std::size_t member, double noise,
                                   std::uint64_t seed) {
  const auto& specs = families();
  if (family >= specs.size()) throw UsageError("synthetic: family index out of range");
  const FamilySpec& f = specs[family];
  Noiser nz(noise, mix_seed(seed, (static_cast<std::uint64_t>(family) << 32) | member));

  std::string src = "class " + nz.camel(f.class_name, true) + " {\n";
  for (const auto& fld : f.fields) src += "  " + std::string(fld.type) + " " + nz.camel(fld.name, false) + ";\n";
  for (const auto& m : f.methods) {
    src += "\n  /** " + nz.sentence(m.doc) + " */\n";
    src += "  " + std::string(m.ret) + " " + nz.camel(m.name, false) + "(";
    std::string body = m.body;
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      // Distinct suffix keeps parameter names unique even when both are noised alike.
      std::string name = nz.camel(m.params[i].name, false);
      if (i > 0) name += std::to_string(i);
      if (i > 0) src += ", ";
      src += std::string(m.params[i].type) + " " + name;
      replace_all(body, "$" + std::to_string(i), name);
    }
    src += ") {\n" + indent_body(body, "    ") + "  }\n";
  }
  src += "}\n";
  return src;
}

SyntheticCorpus gen_synthetic_corpus(std::size_t n_families, std::size_t per_family, double noise,
                                     std::uint64_t seed) {
  if (n_families < 2 || n_families > families().size())
    throw UsageError("synthetic: family count must be in [2, " + std::to_string(families().size()) + "]");
  if (!(noise >= 0.0 && noise <= 1.0)) throw UsageError("synthetic: noise must be in [0, 1]");
  const std::size_t heldout = (per_family + 15) / 16;
  SyntheticCorpus out;
  for (std::size_t member = 0; member < per_family + heldout; ++member) {
    for (std::size_t f = 0; f < n_families; ++f) {
      auto units = parse_source(synthetic_class_source(f, member, noise, seed));
      auto& dest = member < per_family ? out.train_classes : out.heldout_classes;
      dest.push_back(std::move(units.front()));
    }
  }
  out.tasks = make_tasks(out.heldout_classes, out.heldout_classes.size(), mix_seed(seed, 0x7441534bULL));
  return out;
}

}  // namespace codec
