#include <cstdlib>
#include <string>

#include "bergman/errors.hpp"
#include "bergman/symbols.hpp"

namespace bergman {

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Symbol parse() {
        Symbol s = expression();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return s;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, 1, pos_ + 1); }

    bool consume(std::string_view token) {
        if (text_.substr(pos_, token.size()) == token) {
            pos_ += token.size();
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    double number() {
        const std::string rest(text_.substr(pos_));
        const char* begin = rest.c_str();
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("expected a number");
        pos_ += static_cast<std::size_t>(end - begin);
        return v;
    }

    template <class Make>
    Symbol guarded(std::size_t at, Make make) {
        try {
            return make();
        } catch (const DomainError& e) {
            throw ParseError(e.what(), 1, at + 1);
        }
    }

    Symbol expression() {
        const std::size_t start = pos_;
        if (consume("const:")) {
            const double re = number();
            double im = 0.0;
            if (pos_ < text_.size() && text_[pos_] == ',') {
                ++pos_;
                im = number();
            }
            return make_constant({re, im});
        }
        if (consume("ab:")) {
            const double b = number();
            return guarded(start, [&] { return make_ab(b); });
        }
        if (consume("pow:")) {
            const double b = number();
            return guarded(start, [&] { return make_pow(b); });
        }
        if (consume("abs(")) {
            Symbol inner = expression();
            expect(')');
            return modulus(inner);
        }
        if (consume("conj(")) {
            Symbol inner = expression();
            expect(')');
            return conjugate(inner);
        }
        if (consume("trunc:")) {
            const double rho = number();
            expect('(');
            Symbol inner = expression();
            expect(')');
            return guarded(start, [&] { return truncate(inner, rho); });
        }
        if (consume("table:")) {
            const std::size_t path_start = pos_;
            while (pos_ < text_.size() && text_[pos_] != ')') ++pos_;
            if (pos_ == path_start) fail("expected a table path");
            const std::string path(text_.substr(path_start, pos_ - path_start));
            try {
                return load_table(path);
            } catch (const ParseError& e) {
                throw ParseError(e.what(), 1, path_start + 1);
            } catch (const DomainError& e) {
                throw ParseError(e.what(), 1, path_start + 1);
            }
        }
        fail("unknown symbol; expected const:, ab:, pow:, abs(, conj(, trunc: or table:");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Symbol parse_symbol(std::string_view text) { return Parser(text).parse(); }

}  // namespace bergman
