import org.junit.jupiter.params.ParameterizedTest;
import org.junit.jupiter.params.provider.ValueSource;

class ParameterizedStyleTest {

    @ParameterizedTest
    @ValueSource(ints = {1, 3, 5, 15})
    void oddNumbers(int number) {
        assertTrue(number % 2 == 1);
    }

    @ParameterizedTest(name = "{0} is blank")
    @ValueSource(strings = {"", "  "})
    void blankStrings(String input) {
        assertTrue(input.isBlank());
    }
}
