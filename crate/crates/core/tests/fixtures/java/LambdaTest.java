import java.util.List;
import java.util.function.Function;
import java.util.stream.Collectors;

import org.junit.jupiter.api.Test;

class LambdaTest {

    @Test
    void mapsWithLambdas() {
        List<String> names = List.of("ada", "grace", "linus");
        List<Integer> lengths = names.stream().map(s -> s.length()).collect(Collectors.toList());
        Function<Integer, Integer> twice = (Integer x) -> x * 2;
        Runnable r = () -> {
            int y = twice.apply(3);
            assertEquals(6, y);
        };
        r.run();
        names.forEach(System.out::println);
        assertEquals(3, lengths.size());
        assertThrows(NullPointerException.class, () -> names.get(0).compareTo(null));
    }
}
